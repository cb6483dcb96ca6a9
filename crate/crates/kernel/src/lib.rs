//! The common-neighbor probability `K(x, y) = E_Z p(|x - Z|) p(|y - Z|)`.
//!
//! [`k_oracle`] estimates it by Monte Carlo with a standard error, drawing
//! `Z` from a stream fixed by the seed alone so that `K(x, y)` and `K(y, x)`
//! see the same draws. [`k_hat`] is the graph-side estimator, and
//! [`k_gap_check`] evaluates the curvature gap inequality on sampled pairs.

use linkfn::LinkFunction;
use manifold::{euclidean, ManifoldModel, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rgg::{keyed, Adjacency, VertexSet};
use std::io::{self, Write};

/// Smallest accepted Monte Carlo sample count.
pub const MIN_SAMPLES: usize = 100;
/// Violations are flagged beyond this many combined standard errors.
pub const FLAG_SIGMAS: f64 = 3.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `K(x, y)`.
pub fn k_oracle(
    model: &ManifoldModel,
    link: &LinkFunction,
    x: &Point,
    y: &Point,
    samples: usize,
    seed: u64,
) -> Result<KernelEstimate, KernelError> {
    if samples < MIN_SAMPLES {
        return Err(KernelError::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(keyed::stream_seed(seed, "kernel-z"));
    // Welford accumulation keeps the variance stable for tiny kernels.
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let z = model.sample_point(&mut rng);
        let v = link.prob(euclidean(&x.coords, &z.coords)) * link.prob(euclidean(&y.coords, &z.coords));
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    Ok(KernelEstimate {
        value: mean.clamp(0.0, 1.0),
        stderr: (var / samples as f64).sqrt(),
        samples,
    })
}

/// `|N_W(i) ∩ N_W(j)| / |W|`.
pub fn k_hat<G: Adjacency + ?Sized>(g: &G, w: &VertexSet, i: usize, j: usize) -> Result<f64, KernelError> {
    if i == j {
        return Err(KernelError::Domain(format!("k_hat needs distinct vertices, got {i} twice")));
    }
    if w.is_empty() {
        return Err(KernelError::Domain("k_hat over an empty vertex set".into()));
    }
    let c = g
        .common_neighbor_count_in(i, j, w)
        .map_err(|e| KernelError::Domain(e.to_string()))?;
    Ok(c as f64 / w.len() as f64)
}

/// Upper estimate of `sup K` from the diagonal: the largest `K(x, x)` over
/// `points` sampled points plus three standard errors, capped at 1.
pub fn kernel_sup_estimate(
    model: &ManifoldModel,
    link: &LinkFunction,
    points: usize,
    samples: usize,
    seed: u64,
) -> Result<f64, KernelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(keyed::stream_seed(seed, "kernel-sup-points"));
    let xs: Vec<Point> = (0..points).map(|_| model.sample_point(&mut rng)).collect();
    let est: Result<Vec<KernelEstimate>, KernelError> = xs
        .par_iter()
        .enumerate()
        .map(|(k, x)| k_oracle(model, link, x, x, samples, keyed::indexed_seed(seed, k as u64)))
        .collect();
    let top = est?
        .iter()
        .map(|e| e.value + FLAG_SIGMAS * e.stderr)
        .fold(0.0f64, f64::max);
    Ok(top.min(1.0))
}

/// One evaluated pair of the gap check.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub x_id: usize,
    pub y_id: usize,
    pub dist: f64,
    pub k_xy: KernelEstimate,
    pub k_xx: KernelEstimate,
    pub k_yy: KernelEstimate,
    /// `(K(x,x) + K(y,y)) / 2 - c1 min(|x-y|^2, r_M^2) - K(x,y)`.
    pub margin: f64,
    pub combined_stderr: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub c1: f64,
    pub rows: Vec<GapRow>,
}

impl GapReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }

    /// CSV with columns `x_id,y_id,dist,k_xy,k_xx,k_yy,margin,flagged`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x_id,y_id,dist,k_xy,k_xx,k_yy,margin,flagged")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.x_id, r.y_id, r.dist, r.k_xy.value, r.k_xx.value, r.k_yy.value, r.margin, r.flagged
            )?;
        }
        Ok(())
    }
}

/// The largest `c1` the gap inequality is guaranteed for:
/// `l_p^2 mu_min(r_M / 4) / 800`, with `l_p` taken over twice the diameter.
pub fn gap_constant(model: &ManifoldModel, link: &LinkFunction) -> f64 {
    let (_, slope) = link
        .certify_constants(model.diam_euc())
        .expect("model diameter is positive");
    let mu = model
        .mu_min(model.locality_radius() / 4.0)
        .expect("locality radius is positive");
    slope * slope * mu / 800.0
}

/// Evaluates the gap inequality on `pair_samples` pairs. Half the pairs are
/// independent uniform points; the other half place `y` within `r_M` of `x`.
pub fn k_gap_check(
    model: &ManifoldModel,
    link: &LinkFunction,
    c1: f64,
    pair_samples: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<GapReport, KernelError> {
    let r_m = model.locality_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(keyed::stream_seed(seed, "gap-pairs"));
    let pairs: Vec<(Point, Point)> = (0..pair_samples)
        .map(|k| {
            let x = model.sample_point(&mut rng);
            let y = if k % 2 == 0 {
                model.sample_point(&mut rng)
            } else {
                let step = rng.random_range(0.0..1.0) * r_m / (model.ambient_dim() as f64).sqrt();
                let moved: Vec<f64> = x
                    .coords
                    .iter()
                    .map(|c| c + step * rng.random_range(-1.0..1.0))
                    .collect();
                model.project(&Point::new(moved))
            };
            (x, y)
        })
        .collect();
    let rows: Result<Vec<GapRow>, KernelError> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, (x, y))| {
            let s = keyed::indexed_seed(seed, k as u64);
            let k_xy = k_oracle(model, link, x, y, mc_samples, s)?;
            let k_xx = k_oracle(model, link, x, x, mc_samples, s)?;
            let k_yy = k_oracle(model, link, y, y, mc_samples, s)?;
            let dist = x.dist(y);
            let margin = (k_xx.value + k_yy.value) / 2.0 - c1 * (dist * dist).min(r_m * r_m) - k_xy.value;
            let combined_stderr =
                (k_xy.stderr.powi(2) + (k_xx.stderr.powi(2) + k_yy.stderr.powi(2)) / 4.0).sqrt();
            Ok(GapRow {
                x_id: 2 * k,
                y_id: 2 * k + 1,
                dist,
                k_xy,
                k_xx,
                k_yy,
                margin,
                combined_stderr,
                flagged: margin < -FLAG_SIGMAS * combined_stderr,
            })
        })
        .collect();
    Ok(GapReport { c1, rows: rows? })
}
