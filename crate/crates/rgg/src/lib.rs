//! Random geometric graphs on analytic manifolds.
//!
//! Vertices carry i.i.d. latent points drawn from the model's surface
//! measure, and each unordered pair `{i, j}` is joined when its keyed uniform
//! variate is at most `p(|X_i - X_j|)`. Because the variate depends only on
//! `(seed, min(i, j), max(i, j))`, the adjacency is a pure function of the
//! inputs and can be either materialised ([`GeometricGraph`]) or evaluated on
//! demand ([`LazyGraph`]) with bit-identical answers.
//!
//! Reconstruction code sees graphs only through the [`Adjacency`] trait,
//! which has no access to latent positions. Latents are released by
//! [`GeometricGraph::latents`] and [`LazyGraph::latents`] only for
//! [`Capability::Evaluation`].

pub mod keyed;
mod set;

pub use set::{PackedRows, VertexMask, VertexSet};

use linkfn::LinkFunction;
use manifold::{ManifoldModel, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{self, Write};

#[derive(Debug, thiserror::Error)]
pub enum RggError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("latent positions are only available with the evaluation capability")]
    Access,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Who is asking for latent positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    Observer,
    Evaluation,
}

/// Read-only adjacency queries; the only view reconstruction code receives.
pub trait Adjacency: Sync {
    fn vertex_count(&self) -> usize;

    /// Whether `i` and `j` are joined. Always false for `i == j`.
    fn adjacent(&self, i: usize, j: usize) -> bool;

    /// `|N(i) ∩ S|`, never counting `i` itself.
    fn neighbor_count_in(&self, i: usize, s: &VertexSet) -> usize {
        s.iter().filter(|&v| self.adjacent(i, v)).count()
    }

    /// `|N_W(i) ∩ N_W(j)|`.
    fn common_neighbor_count_in(&self, i: usize, j: usize, w: &VertexSet) -> Result<usize, RggError> {
        if i == j {
            return Err(RggError::Domain(format!("common neighbors of {i} with itself")));
        }
        Ok(w.iter()
            .filter(|&v| self.adjacent(i, v) && self.adjacent(j, v))
            .count())
    }

    /// Neighborhoods of `rows` restricted to `cols`, bit-packed.
    fn packed_rows(&self, rows: &[usize], cols: &VertexSet) -> PackedRows {
        PackedRows::build(rows, cols, |i, j| self.adjacent(i, j))
    }

    /// `|N(i) ∩ S| / |S|`, or zero for an empty `S`.
    fn neighbor_ratio(&self, i: usize, s: &VertexSet) -> f64 {
        if s.is_empty() {
            0.0
        } else {
            self.neighbor_count_in(i, s) as f64 / s.len() as f64
        }
    }
}

/// Latent positions stored flat, `dim` coordinates per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Latents {
    dim: usize,
    coords: Vec<f64>,
}

impl Latents {
    /// Wraps flat coordinates, `dim` per point.
    ///
    /// # Panics
    /// If `dim` is zero or does not divide the coordinate count.
    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && coords.len().is_multiple_of(dim), "coordinates do not split into points of dimension {dim}");
        Self { dim, coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> Point {
        Point::new(self.coords(i).to_vec())
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        manifold::euclidean(self.coords(i), self.coords(j))
    }

    /// CSV with header `index,x0,...` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).collect();
        writeln!(out, "index,{}", header.join(","))?;
        for i in 0..self.len() {
            write!(out, "{i}")?;
            for x in self.coords(i) {
                write!(out, ",{x:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Everything that determines a graph: model, link, size, seed, and the
/// latent sample derived from them.
#[derive(Debug, Clone)]
struct Core {
    model: ManifoldModel,
    link: LinkFunction,
    seed: u64,
    key: u64,
    latents: Latents,
}

impl Core {
    fn sample(
        model: ManifoldModel,
        link: LinkFunction,
        vertex_count: usize,
        seed: u64,
    ) -> Result<Self, RggError> {
        if vertex_count < 2 {
            return Err(RggError::Config(format!(
                "a graph needs at least 2 vertices, got {vertex_count}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(keyed::stream_seed(seed, "latents"));
        let dim = model.ambient_dim();
        let mut coords = Vec::with_capacity(vertex_count * dim);
        for _ in 0..vertex_count {
            coords.extend(model.sample_point(&mut rng).coords);
        }
        Ok(Self {
            model,
            link,
            seed,
            key: keyed::pair_key(seed),
            latents: Latents { dim, coords },
        })
    }

    #[inline]
    fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j && keyed::pair_uniform(self.key, i, j) <= self.link.prob(self.latents.dist(i, j))
    }

    fn model_tag(&self) -> String {
        format!("{:?}(R={})", self.model.kind, self.model.scale).to_lowercase()
    }
}

/// A fully materialised graph: one packed row of `vertex_count` bits per
/// vertex.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    core: Core,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl GeometricGraph {
    pub fn generate(
        model: ManifoldModel,
        link: LinkFunction,
        vertex_count: usize,
        seed: u64,
    ) -> Result<Self, RggError> {
        let core = Core::sample(model, link, vertex_count, seed)?;
        let n = vertex_count;
        let words_per_row = n.div_ceil(64);
        let mut rows = vec![0u64; n * words_per_row];
        rows.par_chunks_mut(words_per_row)
            .enumerate()
            .for_each(|(i, row)| {
                for j in 0..n {
                    if core.adjacent(i, j) {
                        row[j / 64] |= 1 << (j % 64);
                    }
                }
            });
        Ok(Self {
            core,
            words_per_row,
            rows,
        })
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn seed(&self) -> u64 {
        self.core.seed
    }

    pub fn model_tag(&self) -> String {
        self.core.model_tag()
    }

    pub fn link_tag(&self) -> String {
        self.core.link.tag()
    }

    pub fn latents(&self, cap: Capability) -> Result<&Latents, RggError> {
        match cap {
            Capability::Evaluation => Ok(&self.core.latents),
            Capability::Observer => Err(RggError::Access),
        }
    }

    /// `|N(i) ∩ mask|` by popcount.
    pub fn neighbor_count_masked(&self, i: usize, mask: &VertexMask) -> usize {
        self.row(i)
            .iter()
            .zip(mask.words())
            .map(|(a, m)| (a & m).count_ones() as usize)
            .sum()
    }

    /// `|N(i) ∩ N(j) ∩ mask|` by popcount.
    pub fn common_neighbor_count_masked(&self, i: usize, j: usize, mask: &VertexMask) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .zip(mask.words())
            .map(|((a, b), m)| (a & b & m).count_ones() as usize)
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edge list: header `# rgg v1 n=<N> seed=<S>`, then `i j` with `i < j`
    /// in ascending lexicographic order.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.vertex_count();
        writeln!(out, "# rgg v1 n={n} seed={}", self.core.seed)?;
        for i in 0..n {
            let row = self.row(i);
            for (w, &word) in row.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    if j > i {
                        writeln!(out, "{i} {j}")?;
                    }
                    bits &= bits - 1;
                }
            }
        }
        Ok(())
    }
}

impl Adjacency for GeometricGraph {
    fn vertex_count(&self) -> usize {
        self.core.latents.len()
    }

    fn adjacent(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] >> (j % 64) & 1 == 1
    }

    fn neighbor_count_in(&self, i: usize, s: &VertexSet) -> usize {
        self.neighbor_count_masked(i, &VertexMask::from_set(s, self.vertex_count()))
    }

    fn common_neighbor_count_in(&self, i: usize, j: usize, w: &VertexSet) -> Result<usize, RggError> {
        if i == j {
            return Err(RggError::Domain(format!("common neighbors of {i} with itself")));
        }
        let mask = VertexMask::from_set(w, self.vertex_count());
        Ok(self.common_neighbor_count_masked(i, j, &mask))
    }
}

/// A graph whose adjacency is evaluated on demand from the keyed variates.
/// Answers every query exactly as [`GeometricGraph`] would for the same
/// inputs, without the quadratic memory.
#[derive(Debug, Clone)]
pub struct LazyGraph {
    core: Core,
}

impl LazyGraph {
    pub fn generate(
        model: ManifoldModel,
        link: LinkFunction,
        vertex_count: usize,
        seed: u64,
    ) -> Result<Self, RggError> {
        Ok(Self {
            core: Core::sample(model, link, vertex_count, seed)?,
        })
    }

    pub fn seed(&self) -> u64 {
        self.core.seed
    }

    pub fn model_tag(&self) -> String {
        self.core.model_tag()
    }

    pub fn link_tag(&self) -> String {
        self.core.link.tag()
    }

    pub fn latents(&self, cap: Capability) -> Result<&Latents, RggError> {
        match cap {
            Capability::Evaluation => Ok(&self.core.latents),
            Capability::Observer => Err(RggError::Access),
        }
    }

    /// Materialises the full graph.
    pub fn materialize(&self) -> GeometricGraph {
        GeometricGraph::generate(
            self.core.model,
            self.core.link,
            self.vertex_count(),
            self.core.seed,
        )
        .expect("inputs already validated")
    }
}

impl Adjacency for LazyGraph {
    fn vertex_count(&self) -> usize {
        self.core.latents.len()
    }

    #[inline]
    fn adjacent(&self, i: usize, j: usize) -> bool {
        self.core.adjacent(i, j)
    }
}
