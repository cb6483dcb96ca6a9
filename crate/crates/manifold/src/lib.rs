//! Analytic models of compact embedded manifolds.
//!
//! Each [`ManifoldModel`] knows how to sample points from its uniform surface
//! measure, measure exact geodesic distances, evaluate the smallest mass of a
//! Euclidean ball, and produce orthonormal tangent frames. Everything is closed
//! form so that reconstructions can be scored against exact ground truth.

mod frame;
mod measure;

pub use frame::{subspace_distance, TangentFrame};

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Relative tolerance for surface membership.
pub const SURFACE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ManifoldError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// The built-in model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Circle of radius `R` in the plane.
    Circle,
    /// Round two-sphere of radius `R` in three dimensions.
    Sphere2,
    /// Product of two circles of radius `R`, embedded flat in four dimensions.
    FlatTorus,
}

/// A point in the ambient Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: &Point) -> f64 {
        euclidean(&self.coords, &other.coords)
    }
}

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An analytic compact manifold embedded in Euclidean space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub kind: ModelKind,
    pub scale: f64,
}

impl ManifoldModel {
    pub fn new(kind: ModelKind, scale: f64) -> Result<Self, ManifoldError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ManifoldError::Domain(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { kind, scale })
    }

    pub fn circle(radius: f64) -> Result<Self, ManifoldError> {
        Self::new(ModelKind::Circle, radius)
    }

    pub fn sphere(radius: f64) -> Result<Self, ManifoldError> {
        Self::new(ModelKind::Sphere2, radius)
    }

    pub fn flat_torus(radius: f64) -> Result<Self, ManifoldError> {
        Self::new(ModelKind::FlatTorus, radius)
    }

    /// Intrinsic dimension `d`.
    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            ModelKind::Circle => 1,
            ModelKind::Sphere2 | ModelKind::FlatTorus => 2,
        }
    }

    /// Ambient dimension `N`.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ModelKind::Circle => 2,
            ModelKind::Sphere2 => 3,
            ModelKind::FlatTorus => 4,
        }
    }

    /// Bound on the norm of the second fundamental form.
    ///
    /// For the flat torus a unit tangent `cos(a) e_theta + sin(a) e_phi` has
    /// normal curvature of norm `sqrt(cos^4 a + sin^4 a) / R`, maximised at
    /// `1 / R` along either factor.
    pub fn kappa(&self) -> f64 {
        1.0 / self.scale
    }

    /// Lower bound on the radius below which every Euclidean ball meets the
    /// surface in a connected set.
    ///
    /// Circle and sphere: a Euclidean ball centred on the surface cuts out an
    /// arc or a cap, always connected, so the radius is unbounded.
    ///
    /// Flat torus: with `s(x) = sin^2(x / 2)` the squared chord is
    /// `4 R^2 (s(dtheta) + s(dphi))`. Since `s` increases on `[0, pi]`, the
    /// set `{s(dtheta) + s(dphi) < t}` inside the fundamental square
    /// `[-pi, pi]^2` is star-shaped about the origin, hence connected. For
    /// radii up to `R` the threshold `t <= 1/4` keeps both offsets below
    /// `pi / 3`, so the set never touches the square's boundary and no
    /// wraparound identification is involved. `R` is therefore a safe value.
    pub fn connectivity_radius(&self) -> f64 {
        match self.kind {
            ModelKind::Circle | ModelKind::Sphere2 => f64::INFINITY,
            ModelKind::FlatTorus => self.scale,
        }
    }

    /// Locality radius `0.01 * min(1 / kappa, connectivity_radius)`.
    pub fn locality_radius(&self) -> f64 {
        0.01 * (1.0 / self.kappa()).min(self.connectivity_radius())
    }

    /// Euclidean diameter.
    pub fn diam_euc(&self) -> f64 {
        match self.kind {
            ModelKind::Circle | ModelKind::Sphere2 => 2.0 * self.scale,
            ModelKind::FlatTorus => 2.0 * std::f64::consts::SQRT_2 * self.scale,
        }
    }

    /// Geodesic diameter.
    pub fn diam_gd(&self) -> f64 {
        match self.kind {
            ModelKind::Circle | ModelKind::Sphere2 => PI * self.scale,
            ModelKind::FlatTorus => std::f64::consts::SQRT_2 * PI * self.scale,
        }
    }

    /// Draws a point from the uniform surface measure.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let r = self.scale;
        let coords = match self.kind {
            ModelKind::Circle => {
                let t = rng.random::<f64>() * TAU;
                vec![r * t.cos(), r * t.sin()]
            }
            ModelKind::Sphere2 => {
                let v: [f64; 3] = UnitSphere.sample(rng);
                vec![r * v[0], r * v[1], r * v[2]]
            }
            ModelKind::FlatTorus => {
                let t = rng.random::<f64>() * TAU;
                let f = rng.random::<f64>() * TAU;
                vec![r * t.cos(), r * t.sin(), r * f.cos(), r * f.sin()]
            }
        };
        self.project(&Point::new(coords))
    }

    /// Point at the given intrinsic coordinates: an angle for the circle,
    /// (polar, azimuth) for the sphere, and (theta, phi) for the torus.
    pub fn point_at(&self, angles: &[f64]) -> Result<Point, ManifoldError> {
        let d = self.intrinsic_dim();
        if angles.len() != d {
            return Err(ManifoldError::Dimension {
                expected: d,
                got: angles.len(),
            });
        }
        let r = self.scale;
        let coords = match self.kind {
            ModelKind::Circle => vec![r * angles[0].cos(), r * angles[0].sin()],
            ModelKind::Sphere2 => {
                let (pol, az) = (angles[0], angles[1]);
                vec![
                    r * pol.sin() * az.cos(),
                    r * pol.sin() * az.sin(),
                    r * pol.cos(),
                ]
            }
            ModelKind::FlatTorus => vec![
                r * angles[0].cos(),
                r * angles[0].sin(),
                r * angles[1].cos(),
                r * angles[1].sin(),
            ],
        };
        Ok(Point::new(coords))
    }

    /// Nearest surface point to an ambient point.
    pub fn project(&self, p: &Point) -> Point {
        let r = self.scale;
        let c = &p.coords;
        let coords = match self.kind {
            ModelKind::Circle | ModelKind::Sphere2 => {
                let norm = dot(c, c).sqrt();
                c.iter().map(|x| x * r / norm).collect()
            }
            ModelKind::FlatTorus => {
                let a = (c[0] * c[0] + c[1] * c[1]).sqrt();
                let b = (c[2] * c[2] + c[3] * c[3]).sqrt();
                vec![c[0] * r / a, c[1] * r / a, c[2] * r / b, c[3] * r / b]
            }
        };
        Point::new(coords)
    }

    /// Whether `p` lies on the surface within [`SURFACE_TOLERANCE`].
    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.ambient_dim() {
            return false;
        }
        let r = self.scale;
        let c = &p.coords;
        let close = |norm: f64| (norm - r).abs() <= SURFACE_TOLERANCE * r * 10.0;
        match self.kind {
            ModelKind::Circle | ModelKind::Sphere2 => close(dot(c, c).sqrt()),
            ModelKind::FlatTorus => {
                close((c[0] * c[0] + c[1] * c[1]).sqrt())
                    && close((c[2] * c[2] + c[3] * c[3]).sqrt())
            }
        }
    }

    /// Exact geodesic distance between two surface points.
    pub fn geodesic_dist(&self, p: &Point, q: &Point) -> f64 {
        self.geodesic_dist_slices(&p.coords, &q.coords)
    }

    /// Slice form of [`ManifoldModel::geodesic_dist`].
    pub fn geodesic_dist_slices(&self, p: &[f64], q: &[f64]) -> f64 {
        let r = self.scale;
        match self.kind {
            // Equal to R * arccos(<p, q> / R^2), written through the chord
            // so that nearby points keep full relative precision.
            ModelKind::Circle | ModelKind::Sphere2 => {
                let half = (euclidean(p, q) / (2.0 * r)).min(1.0);
                2.0 * r * half.asin()
            }
            ModelKind::FlatTorus => {
                let dt = wrapped_angle(p[1].atan2(p[0]) - q[1].atan2(q[0]));
                let df = wrapped_angle(p[3].atan2(p[2]) - q[3].atan2(q[2]));
                r * (dt * dt + df * df).sqrt()
            }
        }
    }

    /// Smallest surface measure of a Euclidean ball of radius `r` centred on
    /// the surface. All built-in models are homogeneous, so this is the mass
    /// of any such ball.
    pub fn mu_min(&self, r: f64) -> Result<f64, ManifoldError> {
        if r.is_nan() || r < 0.0 {
            return Err(ManifoldError::Domain(format!(
                "ball radius must be nonnegative, got {r}"
            )));
        }
        Ok(measure::ball_mass(self.kind, self.scale, r))
    }

    /// Measure of the geodesic ball of radius `rho` around any point.
    pub fn geodesic_ball_mass(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let a = rho / self.scale;
        match self.kind {
            ModelKind::Circle => (a / PI).min(1.0),
            ModelKind::Sphere2 => {
                if a >= PI {
                    1.0
                } else {
                    (1.0 - a.cos()) / 2.0
                }
            }
            ModelKind::FlatTorus => measure::torus_disc_mass(a),
        }
    }

    /// Orthonormal basis of the tangent space at `p`.
    pub fn tangent_frame(&self, p: &Point) -> TangentFrame {
        frame::tangent_frame(self, p)
    }

    /// Surface point whose orthogonal projection onto the tangent plane at
    /// `base` equals `base + v`, for the sphere only.
    ///
    /// With `u = base / R` the point is `v + u * sqrt(R^2 - |v|^2)`, so the
    /// normal displacement from the tangent plane is `R - sqrt(R^2 - |v|^2)`.
    pub fn cap_lift(&self, base: &Point, v: &[f64]) -> Result<Point, ManifoldError> {
        if self.kind != ModelKind::Sphere2 {
            return Err(ManifoldError::Domain(
                "cap lift is defined for the sphere only".into(),
            ));
        }
        let r = self.scale;
        let vv = dot(v, v);
        if vv >= r * r {
            return Err(ManifoldError::Domain(format!(
                "tangent offset {} leaves the cap of radius {r}",
                vv.sqrt()
            )));
        }
        let h = (r * r - vv).sqrt();
        let coords = base
            .coords
            .iter()
            .zip(v)
            .map(|(b, vi)| vi + b / r * h)
            .collect();
        Ok(Point::new(coords))
    }
}

/// Maps an angle difference to its absolute wrapped value in `[0, pi]`.
fn wrapped_angle(d: f64) -> f64 {
    let m = d.rem_euclid(TAU);
    m.min(TAU - m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_sample_is_on_unit_circle() {
        let m = ManifoldModel::circle(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = m.sample_point(&mut rng);
            assert!((dot(&p.coords, &p.coords).sqrt() - 1.0).abs() < 1e-12);
            assert!(m.contains(&p));
        }
    }

    #[test]
    fn sphere_sample_mean_is_near_origin() {
        let m = ManifoldModel::sphere(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mean = [0.0; 3];
        let count = 100_000;
        for _ in 0..count {
            let p = m.sample_point(&mut rng);
            for (acc, x) in mean.iter_mut().zip(&p.coords) {
                *acc += x / count as f64;
            }
        }
        for x in mean {
            assert!(x.abs() < 0.02, "{mean:?}");
        }
    }

    #[test]
    fn torus_sample_has_norm_sqrt_two() {
        let m = ManifoldModel::flat_torus(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = m.sample_point(&mut rng);
        assert!((dot(&p.coords, &p.coords).sqrt() - 2f64.sqrt()).abs() < 1e-12);
        assert!(m.contains(&p));
    }

    #[test]
    fn geodesic_examples() {
        let s = ManifoldModel::sphere(1.0).unwrap();
        let d = s.geodesic_dist(
            &Point::new(vec![1.0, 0.0, 0.0]),
            &Point::new(vec![-1.0, 0.0, 0.0]),
        );
        assert!((d - PI).abs() < 1e-12);

        let c = ManifoldModel::circle(1.0).unwrap();
        let d = c.geodesic_dist(&Point::new(vec![1.0, 0.0]), &Point::new(vec![0.0, 1.0]));
        assert!((d - PI / 2.0).abs() < 1e-12);

        let t = ManifoldModel::flat_torus(1.0).unwrap();
        let p = t.point_at(&[0.0, 0.0]).unwrap();
        let q = t.point_at(&[1.5 * PI, 0.0]).unwrap();
        assert!((t.geodesic_dist(&p, &q) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn geodesic_matches_arccos_form_for_separated_points() {
        let s = ManifoldModel::sphere(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let p = s.sample_point(&mut rng);
            let q = s.sample_point(&mut rng);
            let arccos = 2.0 * (dot(&p.coords, &q.coords) / 4.0).clamp(-1.0, 1.0).acos();
            assert!((s.geodesic_dist(&p, &q) - arccos).abs() < 1e-7);
        }
    }

    #[test]
    fn mu_min_examples() {
        let s = ManifoldModel::sphere(1.0).unwrap();
        assert!((s.mu_min(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((s.mu_min(0.2).unwrap() - 0.01).abs() < 1e-15);
        let c = ManifoldModel::circle(1.0).unwrap();
        assert!((c.mu_min(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(s.mu_min(-0.1), Err(ManifoldError::Domain(_))));
    }

    #[test]
    fn invariants_of_built_in_models() {
        for kind in [ModelKind::Circle, ModelKind::Sphere2, ModelKind::FlatTorus] {
            let m = ManifoldModel::new(kind, 1.7).unwrap();
            assert!(m.locality_radius() > 0.0);
            assert!(m.locality_radius() <= 0.01 / m.kappa() + 1e-15);
            assert!(m.diam_euc() <= m.diam_gd());
            assert!(m.ambient_dim() >= m.intrinsic_dim());
        }
        let c = ManifoldModel::circle(1.0).unwrap();
        assert_eq!((c.intrinsic_dim(), c.ambient_dim()), (1, 2));
        assert_eq!(c.diam_euc(), 2.0);
        assert_eq!(c.diam_gd(), PI);
    }

    #[test]
    fn cap_lift_stays_on_sphere_and_projects_back() {
        let s = ManifoldModel::sphere(1.0).unwrap();
        let base = Point::new(vec![0.0, 0.0, 1.0]);
        let v = [0.03, -0.04, 0.0];
        let q = s.cap_lift(&base, &v).unwrap();
        assert!(s.contains(&q));
        assert!((q.coords[0] - 0.03).abs() < 1e-15);
        assert!((q.coords[1] + 0.04).abs() < 1e-15);
        let t = ManifoldModel::flat_torus(1.0).unwrap();
        assert!(t.cap_lift(&base, &v).is_err());
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(ManifoldModel::sphere(0.0).is_err());
        assert!(ManifoldModel::sphere(f64::NAN).is_err());
    }
}
