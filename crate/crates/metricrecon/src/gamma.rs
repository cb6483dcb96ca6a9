use crate::ReconError;
use clusternet::ClusterNet;
use linkfn::LinkFunction;
use rayon::prelude::*;
use rgg::{Adjacency, VertexSet};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

/// `Gamma(G, r)`: centre-centre edges weighted by estimated distance plus
/// `0.04 delta`, and every other vertex hanging off one centre at weight
/// `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub vertices: VertexSet,
    pub rule_r: f64,
    pub delta: f64,
    centers: Vec<usize>,
    /// Row-major `k x k` edge weights, `+inf` where there is no edge.
    center_weights: Vec<f64>,
    slot: HashMap<usize, usize>,
    center_paths: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Assembles the graph from centre vertices, estimated centre-centre
    /// distances (`estimates[i * k + j]`, read for `i < j`) and leaf
    /// attachments `(vertex, slot)`.
    pub fn from_parts(
        centers: Vec<usize>,
        estimates: &[f64],
        leaves: &[(usize, usize)],
        rule_r: f64,
        delta: f64,
    ) -> Result<Self, ReconError> {
        let k = centers.len();
        if estimates.len() != k * k {
            return Err(ReconError::Config(format!(
                "{} estimates for {k} centres",
                estimates.len()
            )));
        }
        let mut center_weights = vec![f64::INFINITY; k * k];
        for i in 0..k {
            center_weights[i * k + i] = 0.0;
            for j in (i + 1)..k {
                let e = estimates[i * k + j];
                if e <= rule_r {
                    center_weights[i * k + j] = e + 0.04 * delta;
                    center_weights[j * k + i] = e + 0.04 * delta;
                }
            }
        }
        let mut slot: HashMap<usize, usize> = centers.iter().enumerate().map(|(s, &c)| (c, s)).collect();
        if slot.len() != k {
            return Err(ReconError::Config("repeated centre vertex".into()));
        }
        for &(v, s) in leaves {
            if s >= k {
                return Err(ReconError::Config(format!("leaf {v} attached to missing slot {s}")));
            }
            if slot.insert(v, s).is_some() {
                return Err(ReconError::Config(format!("vertex {v} attached twice")));
            }
        }
        let vertices: VertexSet = slot.keys().copied().collect();
        let index = |v: usize| vertices.as_slice().binary_search(&v).expect("vertex present");
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for i in 0..k {
            for j in (i + 1)..k {
                let w = center_weights[i * k + j];
                if w.is_finite() {
                    let (a, b) = (index(centers[i]), index(centers[j]));
                    adjacency[a].push((b, w));
                    adjacency[b].push((a, w));
                }
            }
        }
        for &(v, s) in leaves {
            let (a, b) = (index(v), index(centers[s]));
            adjacency[a].push((b, delta));
            adjacency[b].push((a, delta));
        }
        let center_adjacency: Vec<Vec<(usize, f64)>> = (0..k)
            .map(|i| {
                (0..k)
                    .filter(|&j| j != i && center_weights[i * k + j].is_finite())
                    .map(|j| (j, center_weights[i * k + j]))
                    .collect()
            })
            .collect();
        let center_paths = (0..k).flat_map(|s| shortest_from(&center_adjacency, s)).collect();
        Ok(Self {
            vertices,
            rule_r,
            delta,
            centers,
            center_weights,
            slot,
            center_paths,
            adjacency,
        })
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    /// Slot of the centre a vertex is, or hangs off.
    pub fn slot_of(&self, v: usize) -> Option<usize> {
        self.slot.get(&v).copied()
    }

    fn is_center(&self, v: usize, s: usize) -> bool {
        self.centers[s] == v
    }

    /// Weight of the centre-centre edge between slots, `+inf` when absent.
    pub fn center_weight(&self, a: usize, b: usize) -> f64 {
        self.center_weights[a * self.centers.len() + b]
    }

    /// All edges `(i, j, weight)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            for &(b, w) in list {
                if a < b {
                    out.push((self.vertices.as_slice()[a], self.vertices.as_slice()[b], w));
                }
            }
        }
        out.sort_by_key(|x| (x.0, x.1));
        out
    }

    /// Path distance `sd_Gamma(v, w)`; `+inf` if the centres are
    /// disconnected. With `rule_r = +inf` the path is the direct one,
    /// `v - u_{s_v} - u_{s_w} - w`.
    ///
    /// # Panics
    /// If either vertex is not in the graph.
    pub fn path_metric(&self, v: usize, w: usize) -> f64 {
        if v == w {
            return 0.0;
        }
        let sv = self.slot_of(v).expect("first vertex not in Gamma");
        let sw = self.slot_of(w).expect("second vertex not in Gamma");
        let lv = if self.is_center(v, sv) { 0.0 } else { self.delta };
        let lw = if self.is_center(w, sw) { 0.0 } else { self.delta };
        let middle = if self.rule_r == f64::INFINITY {
            self.center_weight(sv, sw)
        } else {
            self.center_paths[sv * self.centers.len() + sw]
        };
        lv + middle + lw
    }

    /// Shortest path by a priority-queue search over the whole graph.
    pub fn search_distance(&self, v: usize, w: usize) -> f64 {
        let index = |x: usize| {
            self.vertices
                .as_slice()
                .binary_search(&x)
                .expect("vertex not in Gamma")
        };
        shortest_from(&self.adjacency, index(v))[index(w)]
    }

    /// `nu(B_Gamma(u_s, t))` for a measure on the centres.
    pub fn ball_mass(&self, s: usize, t: f64, weights: &[f64]) -> f64 {
        (0..self.centers.len())
            .filter(|&s2| self.path_metric(self.centers[s], self.centers[s2]) <= t)
            .map(|s2| weights[s2])
            .sum()
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn shortest_from(adjacency: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, a)) = heap.pop() {
        if d > dist[a] {
            continue;
        }
        for &(b, w) in &adjacency[a] {
            let nd = d + w;
            if nd < dist[b] {
                dist[b] = nd;
                heap.push(Entry(nd, b));
            }
        }
    }
    dist
}

/// Builds `Gamma(G, rule_r)` over the net centres, their clusters and
/// companions, and the `extra` vertices.
pub fn build_gamma<G: Adjacency + ?Sized>(
    g: &G,
    net: &ClusterNet,
    companions: &[VertexSet],
    link: &LinkFunction,
    rule_r: f64,
    extra: &VertexSet,
) -> Result<WeightedGraph, ReconError> {
    let k = net.clusters.len();
    if companions.len() != k {
        return Err(ReconError::Config(format!("{k} clusters but {} companions", companions.len())));
    }
    let centers = net.centers();
    let mut estimates = vec![f64::INFINITY; k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            if !companions[i].is_empty() {
                estimates[i * k + j] = crate::estimate_center_distance(g, centers[j], &companions[i], link)?;
            }
        }
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (s, (c, u)) in net.clusters.iter().zip(companions).enumerate() {
        for v in c.members.iter().chain(u.iter()) {
            owner.entry(v).or_insert(s);
        }
    }
    let mut leaves: Vec<(usize, usize)> = owner
        .iter()
        .filter(|&(v, _)| !centers.contains(v))
        .map(|(&v, &s)| (v, s))
        .collect();
    let loose: Vec<usize> = extra
        .iter()
        .filter(|v| !owner.contains_key(v) && !centers.contains(v))
        .collect();
    let attached: Vec<(usize, usize)> = loose
        .par_iter()
        .map(|&v| (v, crate::nearest_center(g, v, companions, link)))
        .collect();
    leaves.extend(attached);
    leaves.sort_unstable();
    WeightedGraph::from_parts(centers, &estimates, &leaves, rule_r, net.delta)
}
