//! Graph-only construction of a cluster-net.
//!
//! Every routine here sees the graph through [`Adjacency`] and nothing else.
//! The evaluation helpers at the bottom ([`verify_cluster`],
//! [`verify_delta_net`], [`min_center_separation`]) take [`Latents`], which
//! can only be obtained with the evaluation capability.

mod layout;

pub use layout::BatchLayout;

use linkfn::LinkFunction;
use manifold::{euclidean, ManifoldModel};
use params::ParamSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rgg::{keyed, Adjacency, Latents, VertexSet};
use serde::Serialize;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// `stage` is `1..=d` for the orthogonal stages and `d + 1` for the final
    /// sharp stage; `iteration` is the net loop index when known.
    #[error("no cluster found at stage {stage}{}", iteration.map(|i| format!(" of net iteration {i}")).unwrap_or_default())]
    ClusterNotFound { stage: usize, iteration: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: VertexSet,
    pub center: usize,
    pub radius_param: f64,
}

/// Counters describing one `build_net` run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NetStats {
    pub net_checks: usize,
    pub nearby_built: usize,
    pub groups_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNet {
    pub clusters: Vec<Cluster>,
    pub delta: f64,
    pub halted_normally: bool,
    pub stats: NetStats,
}

impl ClusterNet {
    pub fn centers(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.center).collect()
    }

    /// JSON with `clusters`, `delta`, `halted_normally`, `stats` and the
    /// caller's `provenance` object.
    pub fn to_json(&self, provenance: serde_json::Value) -> serde_json::Value {
        let clusters: Vec<_> = self
            .clusters
            .iter()
            .map(|c| {
                serde_json::json!({
                    "center": c.center,
                    "members": c.members.as_slice(),
                    "radius_param": c.radius_param,
                })
            })
            .collect();
        serde_json::json!({
            "clusters": clusters,
            "delta": self.delta,
            "halted_normally": self.halted_normally,
            "stats": self.stats,
            "provenance": provenance,
        })
    }
}

/// `p(t)` with negative arguments read as zero, so that bands such as
/// `p(sqrt(2) r - 0.95 delta)` stay defined when the offset exceeds the
/// distance.
fn p_at(link: &LinkFunction, t: f64) -> f64 {
    link.prob(t.max(0.0))
}

/// Graph, link and parameters shared by every step of the construction.
#[derive(Clone, Copy)]
pub struct NetContext<'a, G: Adjacency + ?Sized> {
    pub graph: &'a G,
    pub link: &'a LinkFunction,
    pub params: &'a ParamSet,
}

impl<'a, G: Adjacency + ?Sized> NetContext<'a, G> {
    pub fn new(graph: &'a G, link: &'a LinkFunction, params: &'a ParamSet) -> Self {
        Self { graph, link, params }
    }

    fn ratio(&self, i: usize, s: &VertexSet) -> f64 {
        self.graph.neighbor_ratio(i, s)
    }
}

/// Pair-count extraction: counts `|N_V1(i) ∩ N_V1(j)|` for all pairs of
/// `v2`, keeps the pairs within `c1 eta^2 / 2` (in ratio units) of the top
/// count, and returns the vertex of largest degree in the kept-pair graph
/// together with its closed neighbourhood there.
///
/// Ties in degree go to the smallest vertex index.
pub fn generate_cluster<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    v1: &VertexSet,
    v2: &VertexSet,
) -> Result<(VertexSet, usize), ClusterError> {
    if v2.len() < 2 {
        return Err(ClusterError::Precondition(format!(
            "pair extraction needs at least two candidates, got {}",
            v2.len()
        )));
    }
    if v1.is_empty() {
        return Err(ClusterError::Precondition("empty reference batch".into()));
    }
    let rows = ctx.graph.packed_rows(v2.as_slice(), v1);
    let m = rows.len();
    let counts: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|a| ((a + 1)..m).map(|b| rows.common(a, b) as u32).collect())
        .collect();
    let top = counts
        .iter()
        .flat_map(|row| row.iter().copied())
        .max()
        .expect("at least one pair") as f64;
    let floor = top - ctx.params.pair_gap() * v1.len() as f64;
    let mut degree = vec![0usize; m];
    for (a, row) in counts.iter().enumerate() {
        for (off, &c) in row.iter().enumerate() {
            if c as f64 >= floor {
                degree[a] += 1;
                degree[a + 1 + off] += 1;
            }
        }
    }
    // First maximum in index order; `v2` is sorted, so this is the smallest vertex.
    let best = (0..m).fold(0, |best, a| if degree[a] > degree[best] { a } else { best });
    let mut members = vec![rows.vertex(best)];
    for (a, row) in counts.iter().enumerate() {
        for (off, &c) in row.iter().enumerate() {
            if c as f64 >= floor {
                let b = a + 1 + off;
                if a == best {
                    members.push(rows.vertex(b));
                } else if b == best {
                    members.push(rows.vertex(a));
                }
            }
        }
    }
    let center = rows.vertex(best);
    let members = VertexSet::new(members);
    assert!(members.contains(center) && members.is_subset(v2));
    Ok((members, center))
}

/// Vertices of `w` whose neighbour ratio into `established[0]` lies in
/// `[p(r + 0.95 delta), p(r - 0.95 delta)]` and into every later entry lies
/// in `[p(sqrt(2) r + 0.95 delta), p(sqrt(2) r - 0.95 delta)]`.
pub fn orthogonal_filter<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    established: &[(VertexSet, usize)],
    w: &VertexSet,
) -> VertexSet {
    let (r, delta) = (ctx.params.r, ctx.params.delta);
    let near = (p_at(ctx.link, r + 0.95 * delta), p_at(ctx.link, r - 0.95 * delta));
    let diag = std::f64::consts::SQRT_2 * r;
    let far = (p_at(ctx.link, diag + 0.95 * delta), p_at(ctx.link, diag - 0.95 * delta));
    let within = |x: f64, (lo, hi): (f64, f64)| lo <= x && x <= hi;
    let keep: Vec<bool> = w
        .as_slice()
        .par_iter()
        .map(|&i| {
            established.iter().enumerate().all(|(alpha, (v, _))| {
                let band = if alpha == 0 { near } else { far };
                within(ctx.ratio(i, v), band)
            })
        })
        .collect();
    w.iter().zip(keep).filter(|&(_, k)| k).map(|(i, _)| i).collect()
}

/// Vertices of `w` whose neighbour ratios into `established[1..]` match those
/// of `i_nx` within `c3 delta`, and whose ratio into `established[0]` is at
/// least `p(2 delta)`.
pub fn sharp_filter<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    established: &[(VertexSet, usize)],
    i_nx: usize,
    w: &VertexSet,
) -> Result<VertexSet, ClusterError> {
    if established.len() != ctx.params.dim + 1 {
        return Err(ClusterError::Precondition(format!(
            "sharp filter needs {} established clusters, got {}",
            ctx.params.dim + 1,
            established.len()
        )));
    }
    let tol = ctx.params.c3 * ctx.params.delta;
    let floor = p_at(ctx.link, 2.0 * ctx.params.delta);
    let reference: Vec<f64> = established[1..].iter().map(|(v, _)| ctx.ratio(i_nx, v)).collect();
    let keep: Vec<bool> = w
        .as_slice()
        .par_iter()
        .map(|&i| {
            ctx.ratio(i, &established[0].0) >= floor
                && established[1..]
                    .iter()
                    .zip(&reference)
                    .all(|((v, _), &want)| (ctx.ratio(i, v) - want).abs() <= tol)
        })
        .collect();
    Ok(w.iter().zip(keep).filter(|&(_, k)| k).map(|(i, _)| i).collect())
}

/// Builds a cluster near `i_nx` from the seed cluster `(V_0, i_0)` and the
/// fresh batches `batches = [W_1, .., W_{d+1}]`.
pub fn build_nearby_cluster<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    i_nx: usize,
    seed_cluster: (VertexSet, usize),
    batches: &[VertexSet],
) -> Result<(VertexSet, usize), ClusterError> {
    let d = ctx.params.dim;
    if batches.len() != d + 1 {
        return Err(ClusterError::Precondition(format!(
            "need {} batches, got {}",
            d + 1,
            batches.len()
        )));
    }
    let not_found = |stage| ClusterError::ClusterNotFound { stage, iteration: None };
    let mut established = vec![seed_cluster];
    for k in 1..=d {
        let w_k = &batches[k - 1];
        let filtered = orthogonal_filter(ctx, &established, w_k);
        if filtered.len() < 2 {
            return Err(not_found(k));
        }
        let found = generate_cluster(ctx, w_k, &filtered).map_err(|_| not_found(k))?;
        established.push(found);
    }
    let last = &batches[d];
    let filtered = sharp_filter(ctx, &established, i_nx, last)?;
    if filtered.len() < 2 {
        return Err(not_found(d + 1));
    }
    generate_cluster(ctx, last, &filtered).map_err(|_| not_found(d + 1))
}

/// Scans for a vertex of `w` that is far from every cluster of the net
/// (ratio at most `p(0.45 delta)` into all of them) yet close to one
/// (ratio at least `p(0.55 delta)`). Returns the first such vertex in the
/// order "cluster index, then vertex index", with that cluster.
pub fn net_check<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    net: &[Cluster],
    w: &VertexSet,
) -> Option<(usize, usize)> {
    let delta = ctx.params.delta;
    let far = p_at(ctx.link, 0.45 * delta);
    let close = p_at(ctx.link, 0.55 * delta);
    let first_alpha: Vec<Option<usize>> = w
        .as_slice()
        .par_iter()
        .map(|&v| {
            let mut hit = None;
            for (alpha, c) in net.iter().enumerate() {
                let x = ctx.ratio(v, &c.members);
                if x > far {
                    return None;
                }
                if hit.is_none() && x >= close {
                    hit = Some(alpha);
                }
            }
            hit
        })
        .collect();
    w.iter()
        .zip(first_alpha)
        .filter_map(|(v, a)| a.map(|a| (a, v)))
        .min()
        .map(|(alpha, v)| (v, alpha))
}

/// The top-level loop: a first cluster from group 1, then repeated net
/// checks on `W^l_0` and nearby-cluster construction on `W^l_1..W^l_{d+1}`
/// until a net check comes back empty or the groups run out.
pub fn build_net<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    layout: &BatchLayout,
) -> Result<ClusterNet, ClusterError> {
    match build_net_partial(ctx, layout)? {
        (net, None) => Ok(net),
        (_, Some(err)) => Err(err),
    }
}

/// Like [`build_net`], but a failed nearby-cluster step returns the clusters
/// found so far together with the error, with `halted_normally = false`.
pub fn build_net_partial<G: Adjacency + ?Sized>(
    ctx: &NetContext<'_, G>,
    layout: &BatchLayout,
) -> Result<(ClusterNet, Option<ClusterError>), ClusterError> {
    let d = ctx.params.dim;
    if layout.dim() != d || layout.batch_size() != ctx.params.n {
        return Err(ClusterError::Precondition(format!(
            "layout (n = {}, d = {}) does not match parameters (n = {}, d = {})",
            layout.batch_size(),
            layout.dim(),
            ctx.params.n,
            d
        )));
    }
    if layout.end() > ctx.graph.vertex_count() {
        return Err(ClusterError::Precondition(format!(
            "layout needs {} vertices, graph has {}",
            layout.end(),
            ctx.graph.vertex_count()
        )));
    }
    let eta = ctx.params.eta;
    let delta = ctx.params.delta;
    let first = layout.batch(1, d + 1);
    let (members, center) = generate_cluster(ctx, &first, &first)?;
    let mut clusters = vec![Cluster { members, center, radius_param: eta }];
    let mut stats = NetStats { groups_used: 1, ..NetStats::default() };
    let finish = |clusters, halted_normally, stats| ClusterNet { clusters, delta, halted_normally, stats };
    for ell in 2..=layout.groups() {
        stats.net_checks += 1;
        stats.groups_used = ell;
        let Some((i_nx, alpha)) = net_check(ctx, &clusters, &layout.batch(ell, 0)) else {
            return Ok((finish(clusters, true, stats), None));
        };
        let seed = (clusters[alpha].members.clone(), clusters[alpha].center);
        let batches: Vec<VertexSet> = (1..=d + 1).map(|a| layout.batch(ell, a)).collect();
        match build_nearby_cluster(ctx, i_nx, seed, &batches) {
            Ok((members, center)) => {
                stats.nearby_built += 1;
                clusters.push(Cluster { members, center, radius_param: eta });
            }
            Err(ClusterError::ClusterNotFound { stage, .. }) => {
                let err = ClusterError::ClusterNotFound { stage, iteration: Some(ell) };
                return Ok((finish(clusters, false, stats), Some(err)));
            }
            Err(other) => return Err(other),
        }
    }
    Ok((finish(clusters, false, stats), None))
}

/// Whether every member lies within `radius` of the centre and the cluster
/// has at least `min_size` members.
pub fn verify_cluster(latents: &Latents, c: &Cluster, radius: f64, min_size: f64) -> bool {
    c.members.len() as f64 >= min_size && c.members.iter().all(|j| latents.dist(j, c.center) < radius)
}

/// Largest distance from `probes` random model points to the nearest net
/// centre; `+inf` for an empty net.
pub fn verify_delta_net(model: &ManifoldModel, latents: &Latents, net: &ClusterNet, probes: usize, seed: u64) -> f64 {
    if net.clusters.is_empty() {
        return f64::INFINITY;
    }
    let centers: Vec<&[f64]> = net.clusters.iter().map(|c| latents.coords(c.center)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(keyed::stream_seed(seed, "net-probes"));
    let pts: Vec<_> = (0..probes).map(|_| model.sample_point(&mut rng)).collect();
    pts.par_iter()
        .map(|p| {
            centers
                .iter()
                .map(|c| euclidean(&p.coords, c))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Smallest pairwise distance between net centres; `+inf` below two clusters.
pub fn min_center_separation(latents: &Latents, net: &ClusterNet) -> f64 {
    let centers = net.centers();
    let mut best = f64::INFINITY;
    for (k, &a) in centers.iter().enumerate() {
        for &b in &centers[k + 1..] {
            best = best.min(latents.dist(a, b));
        }
    }
    best
}
