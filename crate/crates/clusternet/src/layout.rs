use params::ParamSet;
use rgg::VertexSet;

/// Contiguous batches `W^l_alpha` of `n` vertices each, for groups
/// `l = 1..=groups` and slots `alpha = 0..=d+1`, starting at `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchLayout {
    n: usize,
    dim: usize,
    groups: usize,
    offset: usize,
}

impl BatchLayout {
    pub fn new(n: usize, dim: usize, groups: usize, offset: usize) -> Self {
        assert!(n > 0 && dim > 0 && groups > 0, "batch layout dimensions must be positive");
        Self { n, dim, groups, offset }
    }

    /// The default layout with `ceil(n^varsigma)` groups.
    pub fn for_params(ps: &ParamSet) -> Self {
        Self::new(ps.n, ps.dim, ps.group_count(), 0)
    }

    pub fn batch_size(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn slots(&self) -> usize {
        self.dim + 2
    }

    /// One past the last vertex index used.
    pub fn end(&self) -> usize {
        self.offset + self.groups * self.slots() * self.n
    }

    /// `W^ell_alpha` with `ell` counted from 1.
    pub fn batch(&self, ell: usize, alpha: usize) -> VertexSet {
        assert!((1..=self.groups).contains(&ell) && alpha < self.slots(), "batch ({ell}, {alpha}) out of range");
        let start = self.offset + ((ell - 1) * self.slots() + alpha) * self.n;
        VertexSet::range(start, start + self.n)
    }
}
