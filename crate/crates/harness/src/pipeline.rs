use crate::config::Resolved;
use clusternet::{build_net_partial, min_center_separation, verify_delta_net, BatchLayout, ClusterError, ClusterNet, NetContext};
use metricrecon::{
    build_gamma, empirical_measure, evaluate_reconstruction, extract_companion_clusters, EmpiricalMeasure, ReconError,
    ReconReport, ReconSummary, WeightedGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgg::{keyed, Capability, LazyGraph, RggError, VertexSet};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Graph(#[from] RggError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Recon(#[from] ReconError),
}

/// Vertex ranges of one run: the net batches, one companion batch per
/// group, and two measure batches `V_0` and `V_0'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineLayout {
    pub net: BatchLayout,
    n: usize,
    groups: usize,
}

impl PipelineLayout {
    pub fn new(n: usize, dim: usize, groups: usize) -> Self {
        Self { net: BatchLayout::new(n, dim, groups, 0), n, groups }
    }

    pub fn companion_batches(&self) -> Vec<VertexSet> {
        let start = self.net.end();
        (0..self.groups)
            .map(|s| VertexSet::range(start + s * self.n, start + (s + 1) * self.n))
            .collect()
    }

    pub fn measure_batch(&self) -> VertexSet {
        let start = self.net.end() + self.groups * self.n;
        VertexSet::range(start, start + self.n)
    }

    pub fn second_measure_batch(&self) -> VertexSet {
        let start = self.net.end() + (self.groups + 1) * self.n;
        VertexSet::range(start, start + self.n)
    }

    pub fn vertex_count(&self) -> usize {
        self.net.end() + (self.groups + 2) * self.n
    }
}

/// Graph-side output of one run.
#[derive(Debug)]
pub struct Reconstruction {
    pub seed: u64,
    pub graph: LazyGraph,
    pub layout: PipelineLayout,
    pub net: ClusterNet,
    pub failure: Option<ClusterError>,
    pub companions: Vec<VertexSet>,
    pub geo: WeightedGraph,
    pub euc: WeightedGraph,
    pub nu: EmpiricalMeasure,
    pub nu_alt: EmpiricalMeasure,
}

/// Evaluation of one run against the latent positions.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub max_gap: f64,
    pub min_separation: f64,
    pub report: ReconReport,
    pub total_variation: f64,
}

/// Per-run record written to `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub clusters: usize,
    pub halted_normally: bool,
    pub failure: Option<String>,
    pub failure_stage: Option<usize>,
    pub delta: f64,
    pub max_gap: f64,
    pub min_separation: f64,
    pub net_ok: bool,
    pub companion_sizes: Vec<usize>,
    pub total_variation: f64,
    pub euclidean_within_4delta: f64,
    pub recon: ReconSummary,
}

impl Resolved {
    pub fn layout(&self) -> PipelineLayout {
        PipelineLayout::new(self.params.n, self.params.dim, self.groups)
    }

    /// Graph generation, net, companions, both weighted graphs and both
    /// measures. Uses only the observer view of the graph.
    pub fn reconstruct(&self, seed: u64) -> Result<Reconstruction, PipelineError> {
        let layout = self.layout();
        let graph = LazyGraph::generate(self.model, self.link, layout.vertex_count(), seed)?;
        let ctx = NetContext::new(&graph, &self.link, &self.params);
        let (net, failure) = build_net_partial(&ctx, &layout.net)?;
        let companions =
            extract_companion_clusters(&graph, &net, &layout.companion_batches(), &self.link, self.params.eta)?;
        let v0 = layout.measure_batch();
        let rule_r = 2.0 * self.params.delta.cbrt();
        let geo = build_gamma(&graph, &net, &companions, &self.link, rule_r, &v0)?;
        let euc = build_gamma(&graph, &net, &companions, &self.link, f64::INFINITY, &v0)?;
        let nu = empirical_measure(&graph, &companions, &v0, &self.link);
        let nu_alt = empirical_measure(&graph, &companions, &layout.second_measure_batch(), &self.link);
        Ok(Reconstruction { seed, graph, layout, net, failure, companions, geo, euc, nu, nu_alt })
    }

    /// Random distinct pairs from the measure batch.
    pub fn evaluation_pairs(&self, rec: &Reconstruction) -> Vec<(usize, usize)> {
        let v0 = rec.layout.measure_batch();
        let mut rng = ChaCha8Rng::seed_from_u64(keyed::stream_seed(rec.seed, "eval-pairs"));
        let span = v0.len();
        let base = v0.as_slice()[0];
        (0..self.config.evaluation.pairs)
            .map(|_| {
                let a = rng.random_range(0..span);
                let mut b = rng.random_range(0..span - 1);
                if b >= a {
                    b += 1;
                }
                (base + a, base + b)
            })
            .collect()
    }

    pub fn evaluate(&self, rec: &Reconstruction) -> Result<Evaluation, PipelineError> {
        let latents = rec.graph.latents(Capability::Evaluation)?;
        let ev = &self.config.evaluation;
        let max_gap = verify_delta_net(&self.model, latents, &rec.net, ev.probes, rec.seed);
        let min_separation = min_center_separation(latents, &rec.net);
        let diam = self.model.diam_gd();
        let radii: Vec<f64> = ev.radius_fractions.iter().map(|f| f * diam).collect();
        let mass_slack = (self.params.n as f64).powf(-0.25) + 0.02;
        let report = evaluate_reconstruction(
            latents,
            &self.model,
            &rec.geo,
            &rec.euc,
            &rec.nu,
            &self.evaluation_pairs(rec),
            &radii,
            ev.geodesic_tolerance * diam,
            mass_slack,
        )?;
        Ok(Evaluation {
            max_gap,
            min_separation,
            report,
            total_variation: rec.nu.total_variation(&rec.nu_alt),
        })
    }

    pub fn net_ok(&self, ev: &Evaluation) -> bool {
        ev.max_gap <= self.params.delta && ev.min_separation >= 0.3 * self.params.delta
    }

    pub fn summarize(&self, rec: &Reconstruction, ev: &Evaluation) -> RunSummary {
        let (failure, failure_stage) = match &rec.failure {
            Some(e @ ClusterError::ClusterNotFound { stage, .. }) => (Some(e.to_string()), Some(*stage)),
            Some(e) => (Some(e.to_string()), None),
            None => (None, None),
        };
        let four_delta = 4.0 * self.params.delta;
        let within = ev.report.pairs.iter().filter(|p| p.abs_err_euc <= four_delta).count();
        RunSummary {
            seed: rec.seed,
            clusters: rec.net.clusters.len(),
            halted_normally: rec.net.halted_normally,
            failure,
            failure_stage,
            delta: self.params.delta,
            max_gap: ev.max_gap,
            min_separation: ev.min_separation,
            net_ok: rec.failure.is_none() && self.net_ok(ev),
            companion_sizes: rec.companions.iter().map(|u| u.len()).collect(),
            total_variation: ev.total_variation,
            euclidean_within_4delta: within as f64 / ev.report.pairs.len().max(1) as f64,
            recon: ev.report.summary(),
        }
    }
}
