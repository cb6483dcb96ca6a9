//! The parameter ledger `(varsigma, epsilon, eta, delta, r, c1, C2, c3, C_gap)`.
//!
//! Two modes exist. [`Mode::PaperFaithful`] values come from
//! [`derive_observer_params`], which evaluates the eleven observer items in
//! order; at any desk-scale vertex count they fail [`feasibility_test`].
//! [`Mode::Practical`] values are set directly so that the algorithms'
//! thresholds can be exercised at computable scales.

use linkfn::LinkFunction;
use manifold::ManifoldModel;
use serde::{Deserialize, Serialize};

/// Default gap constant `2^10`.
pub const C_GAP: f64 = 1024.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParamError {
    #[error("observer item ({item}) is not finite and positive: {value}")]
    Derivation { item: &'static str, value: f64 },
    #[error("invalid observer inputs: {0}")]
    Inputs(String),
    #[error("parameter invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PaperFaithful,
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub mode: Mode,
    pub varsigma: f64,
    /// Batch size.
    pub n: usize,
    /// Intrinsic dimension the constants refer to.
    pub dim: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_gap: f64,
}

impl ParamSet {
    /// Practical-mode set with the structural invariants checked:
    /// `epsilon < eta < delta < r`, `delta / eta >= 2` and `r / delta >= 2`.
    #[allow(clippy::too_many_arguments)]
    pub fn practical(
        varsigma: f64,
        n: usize,
        dim: usize,
        epsilon: f64,
        eta: f64,
        delta: f64,
        r: f64,
        c1: f64,
        c3: f64,
    ) -> Result<Self, ParamError> {
        let ps = Self {
            mode: Mode::Practical,
            varsigma,
            n,
            dim,
            epsilon,
            eta,
            delta,
            r,
            c1,
            c2: 1.0,
            c3,
            c_gap: C_GAP,
        };
        ps.check_invariants()?;
        Ok(ps)
    }

    /// Checks the invariants of the set's mode.
    pub fn check_invariants(&self) -> Result<(), ParamError> {
        let fail = |m: String| Err(ParamError::Invariant(m));
        if !(self.varsigma > 0.0 && self.varsigma < 0.25) {
            return fail(format!("varsigma must lie in (0, 1/4), got {}", self.varsigma));
        }
        if self.dim == 0 {
            return fail("dimension must be at least 1".into());
        }
        if !(self.c1 > 0.0 && self.c3 > 0.0 && self.c2 > 0.0) {
            return fail("c1, C2 and c3 must be positive".into());
        }
        if !(0.0 < self.epsilon && self.epsilon < self.eta && self.eta < self.delta && self.delta < self.r)
        {
            return fail(format!(
                "need 0 < epsilon < eta < delta < r, got {} {} {} {}",
                self.epsilon, self.eta, self.delta, self.r
            ));
        }
        match self.mode {
            Mode::Practical => {
                if self.delta / self.eta < 2.0 || self.r / self.delta < 2.0 {
                    return fail(format!(
                        "practical ratios delta/eta = {} and r/delta = {} must be at least 2",
                        self.delta / self.eta,
                        self.r / self.delta
                    ));
                }
            }
            Mode::PaperFaithful => {
                let d = self.dim as f64;
                let delta = self.c_gap * d.sqrt() * self.eta;
                let r = self.c_gap * d * d * delta;
                if delta != self.delta || r != self.r {
                    return fail("in faithful mode delta and r must follow from eta exactly".into());
                }
            }
        }
        Ok(())
    }

    /// Number of batch groups `ceil(n^varsigma)`.
    pub fn group_count(&self) -> usize {
        (self.n as f64).powf(self.varsigma).ceil() as usize
    }

    /// Cluster size floor `n^(1 - varsigma)`.
    pub fn cluster_size_floor(&self) -> f64 {
        (self.n as f64).powf(1.0 - self.varsigma)
    }

    /// Count-fraction gap `c1 eta^2 / 2` used when selecting pairs.
    pub fn pair_gap(&self) -> f64 {
        0.5 * self.c1 * self.eta * self.eta
    }
}

/// A priori knowledge handed to the graph observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverInputs {
    pub total_vertices: f64,
    pub varsigma: f64,
    pub dim: usize,
    /// Upper bound on the Euclidean diameter.
    pub diam_bound: f64,
    /// Upper bound on the curvature constant.
    pub kappa_bound: f64,
    /// Lower bound on the connectivity radius (may be infinite).
    pub connectivity_lower: f64,
    /// Constant `C` with `mu_min(x) >= C x^d` on `[0, r_M]`.
    pub measure_const: f64,
    pub link: LinkFunction,
}

/// Items (i)–(xi) as computed by the observer, in order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObserverDerivation {
    pub n: u64,
    pub r_m: f64,
    pub lipschitz: f64,
    pub min_slope: f64,
    pub epsilon: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub eta: f64,
    pub delta: f64,
    pub r: f64,
    pub varsigma: f64,
    pub dim: usize,
}

impl ObserverDerivation {
    pub fn params(&self) -> ParamSet {
        ParamSet {
            mode: Mode::PaperFaithful,
            varsigma: self.varsigma,
            n: usize::try_from(self.n).unwrap_or(usize::MAX),
            dim: self.dim,
            epsilon: self.epsilon,
            eta: self.eta,
            delta: self.delta,
            r: self.r,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            c_gap: C_GAP,
        }
    }

    /// The eleven items as `(label, value)` rows.
    pub fn items(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("(i) n", self.n as f64),
            ("(ii) r_M", self.r_m),
            ("(iii) L_p", self.lipschitz),
            ("(iv) l_p", self.min_slope),
            ("(v) epsilon", self.epsilon),
            ("(vi) c1", self.c1),
            ("(vii) C2", self.c2),
            ("(viii) c3", self.c3),
            ("(ix) eta", self.eta),
            ("(x) delta", self.delta),
            ("(xi) r", self.r),
        ]
    }
}

/// Evaluates the observer items (i)–(xi) in order.
pub fn derive_observer_params(inp: &ObserverInputs) -> Result<ObserverDerivation, ParamError> {
    let positive = [
        ("total_vertices", inp.total_vertices),
        ("diam_bound", inp.diam_bound),
        ("kappa_bound", inp.kappa_bound),
        ("connectivity_lower", inp.connectivity_lower),
        ("measure_const", inp.measure_const),
    ];
    for (name, v) in positive {
        if !(v > 0.0) {
            return Err(ParamError::Inputs(format!("{name} must be positive, got {v}")));
        }
    }
    if !(inp.varsigma > 0.0 && inp.varsigma < 0.25) || inp.dim == 0 {
        return Err(ParamError::Inputs(format!(
            "need varsigma in (0, 1/4) and d >= 1, got {} and {}",
            inp.varsigma, inp.dim
        )));
    }
    let check = |item: &'static str, value: f64| {
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(ParamError::Derivation { item, value })
        }
    };
    let d = inp.dim as f64;
    let s = inp.varsigma;
    let n_real = check("i", inp.total_vertices.powf(1.0 - 2.0 * s).floor())?;
    let n = n_real;
    let r_m = check("ii", 0.01 * (1.0 / inp.kappa_bound).min(inp.connectivity_lower))?;
    let (lip, slope) = inp
        .link
        .certify_constants(inp.diam_bound)
        .map_err(|e| ParamError::Inputs(e.to_string()))?;
    let lip = check("iii", lip)?;
    let slope = check("iv", slope)?;
    let p_diam = inp.link.prob(inp.diam_bound);
    let epsilon = check(
        "v",
        f64::max(
            6.0 * (2.0 / inp.measure_const).powf(1.0 / d) * n.powf(-s / d),
            n.powf(-0.5 + s) / (p_diam * lip),
        ),
    )?;
    let c1 = check("vi", slope * slope * inp.measure_const * (r_m / 4.0).powf(d) / 800.0)?;
    let c2 = check(
        "vii",
        4.0 * C_GAP.sqrt() * d.sqrt() * lip / (slope.sqrt() * c1.sqrt()),
    )?;
    let c3 = check("viii", slope / (C_GAP * d.sqrt()))?;
    let eta = check(
        "ix",
        f64::max(c2 * epsilon.sqrt(), lip * lip / (c3 * slope * d.sqrt()) * epsilon),
    )?;
    let delta = check("x", C_GAP * d.sqrt() * eta)?;
    let r = check("xi", C_GAP * d * d * delta)?;
    Ok(ObserverDerivation {
        n: n as u64,
        r_m,
        lipschitz: lip,
        min_slope: slope,
        epsilon,
        c1,
        c2,
        c3,
        eta,
        delta,
        r,
        varsigma: s,
        dim: inp.dim,
    })
}

/// `r_M_lower >= 2^4 C_gap d^2 r` and `n >= 100`.
pub fn feasibility_test(ps: &ParamSet, r_m_lower: f64) -> bool {
    let d = ps.dim as f64;
    r_m_lower >= 16.0 * ps.c_gap * d * d * ps.r && ps.n >= 100
}

/// Constraints a practical set may violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// `epsilon < eta < delta < r` fails.
    Ordering,
    /// `delta <= r_M / 4` fails.
    DeltaLocality,
    /// `r <= r_M` fails.
    RLocality,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Violation::Ordering => "epsilon < eta < delta < r",
            Violation::DeltaLocality => "delta <= r_M/4",
            Violation::RLocality => "r <= r_M",
        })
    }
}

/// Lists the practical-mode constraints that fail; empty means usable.
pub fn validate_practical(ps: &ParamSet, model: &ManifoldModel) -> Vec<Violation> {
    let r_m = model.locality_radius();
    let mut out = Vec::new();
    if !(ps.epsilon < ps.eta && ps.eta < ps.delta && ps.delta < ps.r) {
        out.push(Violation::Ordering);
    }
    if ps.delta > r_m / 4.0 {
        out.push(Violation::DeltaLocality);
    }
    if ps.r > r_m {
        out.push(Violation::RLocality);
    }
    out
}

/// One named parameter inequality and whether it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// True-model quantities the parameter inequalities refer to.
#[derive(Debug, Clone, Copy)]
pub struct TrueConstants {
    pub lipschitz: f64,
    pub min_slope: f64,
    pub kernel_sup: f64,
    pub r_m: f64,
}

impl TrueConstants {
    /// Constants of a model and link, with `kernel_sup` supplied separately
    /// (it has no closed form; 1 is always a valid upper bound).
    pub fn of(model: &ManifoldModel, link: &LinkFunction, kernel_sup: f64) -> Self {
        let (lipschitz, min_slope) = link
            .certify_constants(model.diam_euc())
            .expect("model diameter is positive");
        Self {
            lipschitz,
            min_slope,
            kernel_sup,
            r_m: model.locality_radius(),
        }
    }
}

/// Re-checks each parameter inequality numerically, one row per condition:
/// the two lower bounds on epsilon, the bounds on c1, C2 and c3, the lower
/// bound on eta, and the definitions of delta and r.
pub fn check_conditions(ps: &ParamSet, model: &ManifoldModel, k: &TrueConstants) -> Vec<ConditionCheck> {
    let d = ps.dim as f64;
    let n = ps.n as f64;
    let mu = |x: f64| model.mu_min(x.min(model.diam_euc())).unwrap_or(0.0);
    let ge = |name, lhs: f64, rhs: f64| ConditionCheck { name, lhs, rhs, holds: lhs >= rhs };
    let le = |name, lhs: f64, rhs: f64| ConditionCheck { name, lhs, rhs, holds: lhs <= rhs };
    let rel_eq = |name, lhs: f64, rhs: f64| ConditionCheck {
        name,
        lhs,
        rhs,
        holds: (lhs - rhs).abs() <= 1e-12 * rhs.abs(),
    };
    vec![
        ge("epsilon: measure", mu(ps.epsilon / 6.0), 2.0 * n.powf(-ps.varsigma)),
        ge(
            "epsilon: concentration",
            ps.epsilon,
            n.powf(-0.5 + ps.varsigma) / (k.kernel_sup.sqrt() * k.lipschitz),
        ),
        le("c1", ps.c1, k.min_slope.powi(2) * mu(k.r_m / 4.0) / 800.0),
        ge(
            "C2",
            ps.c2,
            4.0 * k.kernel_sup.powf(0.25) * ps.c_gap.sqrt() * d.sqrt() * k.lipschitz
                / (k.min_slope.sqrt() * ps.c1.sqrt()),
        ),
        le("c3", ps.c3, k.min_slope / (ps.c_gap * d.sqrt())),
        ge(
            "eta",
            ps.eta,
            f64::max(
                ps.c2 * ps.epsilon.sqrt(),
                k.lipschitz.powi(2) / (ps.c3 * k.min_slope * d.sqrt()) * ps.epsilon,
            ),
        ),
        rel_eq("delta", ps.delta, ps.c_gap * d.sqrt() * ps.eta),
        rel_eq("r", ps.r, ps.c_gap * d * d * ps.delta),
    ]
}
