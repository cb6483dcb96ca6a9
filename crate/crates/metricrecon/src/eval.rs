use crate::{EmpiricalMeasure, ReconError, WeightedGraph};
use manifold::ManifoldModel;
use rayon::prelude::*;
use rgg::Latents;
use serde::Serialize;
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub pair_id: usize,
    pub v: usize,
    pub w: usize,
    pub true_gd: f64,
    pub est_gd: f64,
    pub true_euc: f64,
    pub est_euc: f64,
    pub abs_err_gd: f64,
    pub abs_err_euc: f64,
}

/// One centre and radius of the ball-measure comparison
/// `mu(B_gd(X_u, t - s_d)) - s_m <= nu(B_Gamma(u, t)) <= mu(B_gd(X_u, t + s_d)) + s_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCheck {
    pub slot: usize,
    pub radius: f64,
    pub nu_mass: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconReport {
    pub pairs: Vec<PairRecord>,
    pub balls: Vec<BallCheck>,
}

/// Error statistics; `unreachable_*` count pairs with an infinite path
/// distance, which are left out of the error quantiles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconSummary {
    pub pairs: usize,
    pub unreachable_gd: usize,
    pub unreachable_euc: usize,
    pub max_err_gd: f64,
    pub mean_err_gd: f64,
    pub q50_err_gd: f64,
    pub q99_err_gd: f64,
    pub max_err_euc: f64,
    pub mean_err_euc: f64,
    pub q50_err_euc: f64,
    pub q99_err_euc: f64,
    pub balls_total: usize,
    pub balls_holding: usize,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn stats(errors: impl Iterator<Item = f64>) -> (usize, f64, f64, f64, f64) {
    let mut finite = Vec::new();
    let mut unreachable = 0;
    for e in errors {
        if e.is_finite() {
            finite.push(e);
        } else {
            unreachable += 1;
        }
    }
    finite.sort_by(f64::total_cmp);
    let mean = finite.iter().sum::<f64>() / finite.len().max(1) as f64;
    let max = finite.last().copied().unwrap_or(f64::NAN);
    (unreachable, max, mean, quantile(&finite, 0.5), quantile(&finite, 0.99))
}

impl ReconReport {
    pub fn summary(&self) -> ReconSummary {
        let (unreachable_gd, max_err_gd, mean_err_gd, q50_err_gd, q99_err_gd) =
            stats(self.pairs.iter().map(|p| p.abs_err_gd));
        let (unreachable_euc, max_err_euc, mean_err_euc, q50_err_euc, q99_err_euc) =
            stats(self.pairs.iter().map(|p| p.abs_err_euc));
        ReconSummary {
            pairs: self.pairs.len(),
            unreachable_gd,
            unreachable_euc,
            max_err_gd,
            mean_err_gd,
            q50_err_gd,
            q99_err_gd,
            max_err_euc,
            mean_err_euc,
            q50_err_euc,
            q99_err_euc,
            balls_total: self.balls.len(),
            balls_holding: self.balls.iter().filter(|b| b.holds).count(),
        }
    }

    /// Columns `pair_id,true_gd,est_gd,true_euc,est_euc,abs_err_gd,abs_err_euc`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "pair_id,true_gd,est_gd,true_euc,est_euc,abs_err_gd,abs_err_euc")?;
        for p in &self.pairs {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.pair_id, p.true_gd, p.est_gd, p.true_euc, p.est_euc, p.abs_err_gd, p.abs_err_euc
            )?;
        }
        Ok(())
    }
}

/// Compares both path metrics with the latent distances on `pairs`, and
/// checks the ball-measure sandwich at every centre for each of `radii`
/// with distance slack `distance_slack` and mass slack `mass_slack`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_reconstruction(
    latents: &Latents,
    model: &ManifoldModel,
    geo: &WeightedGraph,
    euc: &WeightedGraph,
    nu: &EmpiricalMeasure,
    pairs: &[(usize, usize)],
    radii: &[f64],
    distance_slack: f64,
    mass_slack: f64,
) -> Result<ReconReport, ReconError> {
    if nu.weights.len() != geo.centers().len() {
        return Err(ReconError::Config(format!(
            "measure on {} centres, graph has {}",
            nu.weights.len(),
            geo.centers().len()
        )));
    }
    let records = pairs
        .par_iter()
        .enumerate()
        .map(|(pair_id, &(v, w))| {
            let true_gd = model.geodesic_dist_slices(latents.coords(v), latents.coords(w));
            let true_euc = latents.dist(v, w);
            let est_gd = geo.path_metric(v, w);
            let est_euc = euc.path_metric(v, w);
            PairRecord {
                pair_id,
                v,
                w,
                true_gd,
                est_gd,
                true_euc,
                est_euc,
                abs_err_gd: (est_gd - true_gd).abs(),
                abs_err_euc: (est_euc - true_euc).abs(),
            }
        })
        .collect();
    let mass = |rho: f64| if rho <= 0.0 { 0.0 } else { model.geodesic_ball_mass(rho) };
    let mut balls = Vec::new();
    for slot in 0..geo.centers().len() {
        for &radius in radii {
            let nu_mass = geo.ball_mass(slot, radius, &nu.weights);
            let lower = mass(radius - distance_slack) - mass_slack;
            let upper = mass(radius + distance_slack) + mass_slack;
            balls.push(BallCheck {
                slot,
                radius,
                nu_mass,
                lower,
                upper,
                holds: lower <= nu_mass && nu_mass <= upper,
            });
        }
    }
    Ok(ReconReport { pairs: records, balls })
}
