use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{write_atomic, write_json};
use crate::pipeline::{PipelineError, RunSummary};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

/// Aggregate over trials, written to `experiment.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub seeds: Vec<u64>,
    pub trials: usize,
    pub nets_ok: usize,
    pub halted_normally: usize,
    /// Trials whose net construction stopped at each stage, keyed by stage.
    pub not_found_by_stage: BTreeMap<usize, usize>,
    pub worst_geodesic_error: f64,
    pub geodesic_limit: f64,
    pub worst_euclidean_fraction: f64,
    pub passed: bool,
    pub runs: Vec<RunSummary>,
}

/// Runs `trials` seeds `seed, seed + 1, ..`, writing per-trial reports under
/// `out/trial_<k>/` and the aggregate to `out/experiment.json`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentSummary, ExperimentError> {
    let res = cfg.resolve()?;
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|t| cfg.seed + t).collect();
    let runs: Result<Vec<RunSummary>, ExperimentError> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| {
            let rec = res.reconstruct(seed)?;
            let ev = res.evaluate(&rec)?;
            let dir = out.join(format!("trial_{k}"));
            let provenance = serde_json::json!({ "seed": seed, "params": res.params });
            write_json(&dir.join("net.json"), &rec.net.to_json(provenance))?;
            write_atomic(&dir.join("recon.csv"), |w| ev.report.write_csv(w))?;
            let summary = res.summarize(&rec, &ev);
            write_json(&dir.join("summary.json"), &summary)?;
            Ok(summary)
        })
        .collect();
    let runs = runs?;
    let mut not_found_by_stage = BTreeMap::new();
    for r in &runs {
        if let Some(stage) = r.failure_stage {
            *not_found_by_stage.entry(stage).or_insert(0) += 1;
        }
    }
    let geodesic_limit = cfg.evaluation.geodesic_tolerance * res.model.diam_gd();
    let worst_geodesic_error = runs.iter().map(|r| r.recon.max_err_gd).fold(0.0, f64::max);
    let worst_euclidean_fraction = runs.iter().map(|r| r.euclidean_within_4delta).fold(1.0, f64::min);
    let nets_ok = runs.iter().filter(|r| r.net_ok).count();
    let passed = nets_ok as f64 >= cfg.acceptance.net_success * runs.len() as f64
        && worst_geodesic_error <= geodesic_limit
        && worst_euclidean_fraction >= cfg.acceptance.euclidean_fraction;
    let summary = ExperimentSummary {
        seeds,
        trials: runs.len(),
        nets_ok,
        halted_normally: runs.iter().filter(|r| r.halted_normally).count(),
        not_found_by_stage,
        worst_geodesic_error,
        geodesic_limit,
        worst_euclidean_fraction,
        passed,
        runs,
    };
    write_json(&out.join("experiment.json"), &summary)?;
    Ok(summary)
}
