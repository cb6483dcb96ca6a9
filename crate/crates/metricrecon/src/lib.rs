//! Metric reconstruction on top of a cluster-net.
//!
//! Each net cluster `(U_s, u_s)` gets a companion `U'_s` drawn from a fresh
//! batch. Inverting the neighbour ratio `|N(v) ∩ U'_s| / |U'_s|` through the
//! link gives a distance estimate from any vertex `v` to `u_s`. Those
//! estimates define the weighted graph [`WeightedGraph`] (`Gamma(G, r)`) and
//! the [`EmpiricalMeasure`] on the centres.

mod eval;
mod gamma;

pub use eval::{evaluate_reconstruction, BallCheck, PairRecord, ReconReport, ReconSummary};
pub use gamma::{build_gamma, WeightedGraph};

use clusternet::ClusterNet;
use linkfn::LinkFunction;
use rayon::prelude::*;
use rgg::{Adjacency, VertexSet};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReconError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// `U'_s = {v in V_s : |N(v) ∩ U_s| / |U_s| >= p(1.5 eta)}`, one fresh batch
/// per net cluster.
pub fn extract_companion_clusters<G: Adjacency + ?Sized>(
    g: &G,
    net: &ClusterNet,
    batches: &[VertexSet],
    link: &LinkFunction,
    eta: f64,
) -> Result<Vec<VertexSet>, ReconError> {
    if batches.len() < net.clusters.len() {
        return Err(ReconError::Config(format!(
            "{} net clusters but only {} companion batches",
            net.clusters.len(),
            batches.len()
        )));
    }
    let threshold = link.prob(1.5 * eta);
    Ok(net
        .clusters
        .iter()
        .zip(batches)
        .map(|(c, batch)| {
            let keep: Vec<bool> = batch
                .as_slice()
                .par_iter()
                .map(|&v| g.neighbor_ratio(v, &c.members) >= threshold)
                .collect();
            batch.iter().zip(keep).filter(|&(_, k)| k).map(|(v, _)| v).collect()
        })
        .collect())
}

/// `p^{-1}(|N(v) ∩ U'| / |U'|)`, clamped to the link's working interval.
pub fn estimate_center_distance<G: Adjacency + ?Sized>(
    g: &G,
    v: usize,
    companion: &VertexSet,
    link: &LinkFunction,
) -> Result<f64, ReconError> {
    if companion.is_empty() {
        return Err(ReconError::Domain("empty companion cluster".into()));
    }
    if companion.contains(v) {
        return Err(ReconError::Domain(format!("vertex {v} belongs to the companion cluster")));
    }
    Ok(link.inverse(g.neighbor_ratio(v, companion)))
}

/// Index of the smallest estimate, the earlier index winning ties.
pub(crate) fn argmin(estimates: &[f64]) -> usize {
    let mut best = 0;
    for (s, &e) in estimates.iter().enumerate() {
        if e < estimates[best] {
            best = s;
        }
    }
    best
}

/// Slot `s_v` of the centre nearest to `v` by estimated distance; empty
/// companions never win.
pub fn nearest_center<G: Adjacency + ?Sized>(
    g: &G,
    v: usize,
    companions: &[VertexSet],
    link: &LinkFunction,
) -> usize {
    let est: Vec<f64> = companions
        .iter()
        .map(|u| {
            if u.is_empty() {
                f64::INFINITY
            } else {
                link.inverse(g.neighbor_ratio(v, u))
            }
        })
        .collect();
    argmin(&est)
}

/// Probability weights on the net centres.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EmpiricalMeasure {
    pub weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn from_assignments(assign: &[usize], centers: usize) -> Self {
        let mut counts = vec![0usize; centers];
        for &s in assign {
            counts[s] += 1;
        }
        let total = assign.len().max(1) as f64;
        Self {
            weights: counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    /// Half the L1 distance between two measures on the same centres.
    pub fn total_variation(&self, other: &EmpiricalMeasure) -> f64 {
        assert_eq!(self.weights.len(), other.weights.len(), "measures on different supports");
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0
    }
}

/// `nu({u_s}) = |{v in V_0 : s_v = s}| / |V_0|`.
pub fn empirical_measure<G: Adjacency + ?Sized>(
    g: &G,
    companions: &[VertexSet],
    v0: &VertexSet,
    link: &LinkFunction,
) -> EmpiricalMeasure {
    let assign: Vec<usize> = v0
        .as_slice()
        .par_iter()
        .map(|&v| nearest_center(g, v, companions, link))
        .collect();
    EmpiricalMeasure::from_assignments(&assign, companions.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_prefers_the_earlier_index() {
        assert_eq!(argmin(&[3.0, 1.0, 2.0, 1.0]), 1);
        assert_eq!(argmin(&[0.5]), 0);
    }

    #[test]
    fn measure_counts_assignments() {
        let nu = EmpiricalMeasure::from_assignments(&[0, 0, 1, 1], 2);
        assert_eq!(nu.weights, vec![0.5, 0.5]);
        let one = EmpiricalMeasure::from_assignments(&[0, 0, 0], 1);
        assert_eq!(one.weights, vec![1.0]);
    }

    #[test]
    fn measure_is_invariant_under_relabelling() {
        let a = EmpiricalMeasure::from_assignments(&[2, 0, 1, 1, 0], 3);
        let b = EmpiricalMeasure::from_assignments(&[1, 0, 2, 0, 1], 3);
        assert_eq!(a, b);
        assert_eq!(a.total_variation(&b), 0.0);
    }

    #[test]
    fn total_variation_of_disjoint_supports_is_one() {
        let a = EmpiricalMeasure { weights: vec![1.0, 0.0] };
        let b = EmpiricalMeasure { weights: vec![0.0, 1.0] };
        assert_eq!(a.total_variation(&b), 1.0);
    }
}
