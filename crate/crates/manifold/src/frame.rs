use crate::{dot, ManifoldError, ManifoldModel, ModelKind, Point};
use nalgebra::DMatrix;

/// Orthonormal basis of a tangent space, anchored at a surface point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    pub base: Point,
    pub basis: Vec<Vec<f64>>,
}

impl TangentFrame {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Projection of `v` onto the span of the frame, in ambient coordinates.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for e in &self.basis {
            let c = dot(e, v);
            for (o, x) in out.iter_mut().zip(e) {
                *o += c * x;
            }
        }
        out
    }

    /// Component of `v` orthogonal to the span of the frame.
    pub fn normal_part(&self, v: &[f64]) -> Vec<f64> {
        let t = self.project(v);
        v.iter().zip(&t).map(|(a, b)| a - b).collect()
    }
}

pub(crate) fn tangent_frame(model: &ManifoldModel, p: &Point) -> TangentFrame {
    let c = &p.coords;
    let basis = match model.kind {
        ModelKind::Circle => {
            let n = dot(c, c).sqrt();
            vec![vec![-c[1] / n, c[0] / n]]
        }
        ModelKind::Sphere2 => {
            let n = dot(c, c).sqrt();
            let (x, y, z) = (c[0] / n, c[1] / n, c[2] / n);
            // Branch-free orthonormal completion of a unit vector.
            let sign = 1f64.copysign(z);
            let a = -1.0 / (sign + z);
            let b = x * y * a;
            vec![
                vec![1.0 + sign * x * x * a, sign * b, -sign * x],
                vec![b, sign + y * y * a, -y],
            ]
        }
        ModelKind::FlatTorus => {
            let a = (c[0] * c[0] + c[1] * c[1]).sqrt();
            let b = (c[2] * c[2] + c[3] * c[3]).sqrt();
            vec![
                vec![-c[1] / a, c[0] / a, 0.0, 0.0],
                vec![0.0, 0.0, -c[3] / b, c[2] / b],
            ]
        }
    };
    TangentFrame {
        base: p.clone(),
        basis,
    }
}

/// Largest principal angle sine between the spans of two frames: the top
/// singular value of `B` projected onto the orthogonal complement of `A`.
pub fn subspace_distance(a: &TangentFrame, b: &TangentFrame) -> Result<f64, ManifoldError> {
    if a.dim() != b.dim() {
        return Err(ManifoldError::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let ambient = a.base.dim();
    let cols: Vec<f64> = b.basis.iter().flat_map(|v| a.normal_part(v)).collect();
    let m = DMatrix::from_column_slice(ambient, b.dim(), &cols);
    let top = m
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s));
    Ok(top.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_orthonormal(model: &ManifoldModel, f: &TangentFrame) {
        for (i, u) in f.basis.iter().enumerate() {
            for (j, v) in f.basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - want).abs() < 1e-12);
            }
        }
        // Normals: radial for circle and sphere, the two factor radials for the torus.
        let c = &f.base.coords;
        let normals: Vec<Vec<f64>> = match model.kind {
            ModelKind::FlatTorus => vec![
                vec![c[0], c[1], 0.0, 0.0],
                vec![0.0, 0.0, c[2], c[3]],
            ],
            _ => vec![c.clone()],
        };
        for nrm in &normals {
            let len = dot(nrm, nrm).sqrt();
            for u in &f.basis {
                assert!((dot(u, nrm) / len).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for kind in [ModelKind::Circle, ModelKind::Sphere2, ModelKind::FlatTorus] {
            let m = ManifoldModel::new(kind, 1.3).unwrap();
            for _ in 0..200 {
                let p = m.sample_point(&mut rng);
                assert_orthonormal(&m, &m.tangent_frame(&p));
            }
            // Poles and axis points stress the sphere completion's branch.
            for pole in [[0.0, 0.0, 1.3], [0.0, 0.0, -1.3], [1.3, 0.0, 0.0]] {
                if kind == ModelKind::Sphere2 {
                    let p = Point::new(pole.to_vec());
                    assert_orthonormal(&m, &m.tangent_frame(&p));
                }
            }
        }
    }

    #[test]
    fn frame_examples() {
        let c = ManifoldModel::circle(1.0).unwrap();
        let f = c.tangent_frame(&Point::new(vec![1.0, 0.0]));
        assert!((f.basis[0][0]).abs() < 1e-15 && (f.basis[0][1] - 1.0).abs() < 1e-15);

        let t = ManifoldModel::flat_torus(1.0).unwrap();
        let f = t.tangent_frame(&t.point_at(&[0.0, 0.0]).unwrap());
        assert_eq!(f.basis[0], vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.basis[1], vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn subspace_distance_examples() {
        let s = ManifoldModel::sphere(1.0).unwrap();
        let p = Point::new(vec![0.0, 0.0, 1.0]);
        let f = s.tangent_frame(&p);
        assert!(subspace_distance(&f, &f).unwrap() < 1e-15);

        let c = ManifoldModel::circle(1.0).unwrap();
        let a = c.tangent_frame(&Point::new(vec![1.0, 0.0]));
        let b = c.tangent_frame(&Point::new(vec![0.0, 1.0]));
        assert!((subspace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);

        let line = c.tangent_frame(&Point::new(vec![1.0, 0.0]));
        assert!(matches!(
            subspace_distance(&line, &f),
            Err(ManifoldError::Dimension { .. })
        ));
    }

    #[test]
    fn sphere_subspace_distance_is_sine_of_normal_angle() {
        // Tangent planes of the unit sphere at p and q differ by the angle
        // between p and q, and the largest principal sine equals |p x q|.
        let s = ManifoldModel::sphere(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = s.sample_point(&mut rng);
            let q = s.sample_point(&mut rng);
            let (a, b) = (&p.coords, &q.coords);
            let cross = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            let want = dot(&cross, &cross).sqrt();
            let got = subspace_distance(&s.tangent_frame(&p), &s.tangent_frame(&q)).unwrap();
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }
}
