use crate::ModelKind;
use std::f64::consts::PI;

const QUAD_TOLERANCE: f64 = 1e-13;

/// Surface mass of a Euclidean ball of radius `r` centred on the surface.
pub(crate) fn ball_mass(kind: ModelKind, scale: f64, r: f64) -> f64 {
    let x = r / scale;
    match kind {
        ModelKind::Circle => 2.0 * (x / 2.0).min(1.0).asin() / PI,
        ModelKind::Sphere2 => (x * x / 4.0).min(1.0),
        ModelKind::FlatTorus => torus_ball_mass(x * x / 4.0),
    }
}

/// Fraction of the angle square where `sin^2(dt/2) + sin^2(df/2) < s`.
///
/// Integrates, over the first quadrant offset `x`, the admissible range of
/// the second offset `2 asin(sqrt(s - sin^2(x/2)))`.
fn torus_ball_mass(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 2.0 {
        return 1.0;
    }
    let x_max = 2.0 * s.min(1.0).sqrt().asin();
    let inner = |x: f64| {
        let h = (x / 2.0).sin();
        let rest = (s - h * h).clamp(0.0, 1.0);
        2.0 * rest.sqrt().asin()
    };
    let area = quadrature::integrate(inner, 0.0, x_max, QUAD_TOLERANCE).integral;
    (area / (PI * PI)).min(1.0)
}

/// Fraction of the flat torus within intrinsic distance `a` (in units of the
/// factor radius) of a point, accounting for self-overlap once `a > pi`.
pub(crate) fn torus_disc_mass(a: f64) -> f64 {
    if a <= PI {
        return a * a / (4.0 * PI);
    }
    if a >= PI * std::f64::consts::SQRT_2 {
        return 1.0;
    }
    let column = |x: f64| (a * a - x * x).max(0.0).sqrt().min(PI);
    let area = quadrature::integrate(column, 0.0, PI, QUAD_TOLERANCE).integral;
    (area / (PI * PI)).min(1.0)
}
