//! Link functions mapping latent distance to edge probability.

use serde::{Deserialize, Serialize};

/// Bisection tolerance for the generic inverse.
pub const INVERSE_TOLERANCE: f64 = 1e-12;
/// Iteration cap for the generic inverse.
pub const INVERSE_MAX_ITERS: usize = 200;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LinkError {
    #[error("distance must be nonnegative, got {0}")]
    NegativeDistance(f64),
    #[error("invalid link parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LinkFamily {
    /// `t -> a * exp(-b t)`.
    ExpDecay { a: f64, b: f64 },
    /// `t -> a - b t`, clamped to `[0, 1]`.
    Affine { a: f64, b: f64 },
}

/// A link function together with the domain bound `D` on which its
/// constants are certified (the working interval is `[0, 2D]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFunction {
    pub family: LinkFamily,
    pub domain_bound: f64,
}

impl LinkFunction {
    /// Validated constructor: values in `[0, 1]` and strictly decreasing on `[0, 2D]`.
    pub fn new(family: LinkFamily, domain_bound: f64) -> Result<Self, LinkError> {
        let bad = |msg: String| Err(LinkError::InvalidParameters(msg));
        if !(domain_bound.is_finite() && domain_bound > 0.0) {
            return bad(format!("domain bound must be positive, got {domain_bound}"));
        }
        match family {
            LinkFamily::ExpDecay { a, b } => {
                if !(a > 0.0 && a <= 1.0 && b > 0.0 && b.is_finite()) {
                    return bad(format!("exp_decay needs 0 < a <= 1 and b > 0, got a={a} b={b}"));
                }
            }
            LinkFamily::Affine { a, b } => {
                if !(b > 0.0 && a <= 1.0 && a - 2.0 * b * domain_bound >= 0.0) {
                    return bad(format!(
                        "affine needs b > 0, a <= 1 and a - 2bD >= 0, got a={a} b={b} D={domain_bound}"
                    ));
                }
            }
        }
        Ok(Self { family, domain_bound })
    }

    pub fn exp_decay(a: f64, b: f64, domain_bound: f64) -> Result<Self, LinkError> {
        Self::new(LinkFamily::ExpDecay { a, b }, domain_bound)
    }

    pub fn affine(a: f64, b: f64, domain_bound: f64) -> Result<Self, LinkError> {
        Self::new(LinkFamily::Affine { a, b }, domain_bound)
    }

    /// Unvalidated constructor for degenerate test links such as `p = 1`.
    #[doc(hidden)]
    pub fn degenerate(family: LinkFamily, domain_bound: f64) -> Self {
        Self { family, domain_bound }
    }

    /// `p(t)`, rejecting negative distances.
    pub fn eval(&self, t: f64) -> Result<f64, LinkError> {
        if t.is_nan() || t < 0.0 {
            return Err(LinkError::NegativeDistance(t));
        }
        Ok(self.prob(t))
    }

    /// `p(t)` for a distance already known to be nonnegative.
    #[inline]
    pub fn prob(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match self.family {
            LinkFamily::ExpDecay { a, b } => a * (-b * t).exp(),
            LinkFamily::Affine { a, b } => (a - b * t).clamp(0.0, 1.0),
        }
    }

    /// Upper end of the working interval, `2D`.
    pub fn max_distance(&self) -> f64 {
        2.0 * self.domain_bound
    }

    /// Monotone inverse with clamping: values above `p(0)` give 0 and values
    /// below `p(2D)` give `2D`.
    pub fn inverse(&self, y: f64) -> f64 {
        let hi_t = self.max_distance();
        if y >= self.prob(0.0) {
            return 0.0;
        }
        if y <= self.prob(hi_t) {
            return hi_t;
        }
        let t = match self.family {
            LinkFamily::ExpDecay { a, b } => (a / y).ln() / b,
            LinkFamily::Affine { a, b } => (a - y) / b,
        };
        t.clamp(0.0, hi_t)
    }

    /// Inverse by bisection on `[0, 2D]`, valid for any decreasing link.
    pub fn inverse_by_bisection(&self, y: f64) -> f64 {
        monotone_inverse(|t| self.prob(t), 0.0, self.max_distance(), y)
    }

    /// `(L_p, l_p)` on `[0, 2D]` for the given `D`.
    pub fn certify_constants(&self, domain_bound: f64) -> Result<(f64, f64), LinkError> {
        if !(domain_bound > 0.0) {
            return Err(LinkError::InvalidParameters(format!(
                "domain bound must be positive, got {domain_bound}"
            )));
        }
        Ok(match self.family {
            LinkFamily::ExpDecay { a, b } => (a * b, a * b * (-2.0 * b * domain_bound).exp()),
            LinkFamily::Affine { b, .. } => (b, b),
        })
    }

    /// Lipschitz constant on the link's own working interval.
    pub fn lipschitz(&self) -> f64 {
        self.constants().0
    }

    /// Smallest slope magnitude on the link's own working interval.
    pub fn min_slope(&self) -> f64 {
        self.constants().1
    }

    fn constants(&self) -> (f64, f64) {
        self.certify_constants(self.domain_bound)
            .expect("domain bound validated at construction")
    }

    /// Short provenance tag such as `exp_decay(0.9,1)`.
    pub fn tag(&self) -> String {
        match self.family {
            LinkFamily::ExpDecay { a, b } => format!("exp_decay({a},{b})"),
            LinkFamily::Affine { a, b } => format!("affine({a},{b})"),
        }
    }
}

/// Solves `f(t) = y` for a decreasing `f` on `[lo, hi]` by bisection, with the
/// same clamping contract as [`LinkFunction::inverse`].
pub fn monotone_inverse(f: impl Fn(f64) -> f64, lo: f64, hi: f64, y: f64) -> f64 {
    if y >= f(lo) {
        return lo;
    }
    if y <= f(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..INVERSE_MAX_ITERS {
        let mid = 0.5 * (a + b);
        if f(mid) > y {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= INVERSE_TOLERANCE {
            break;
        }
    }
    0.5 * (a + b)
}
