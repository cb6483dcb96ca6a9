use crate::RggError;

/// A sorted, duplicate-free set of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn range(start: usize, end: usize) -> Self {
        Self {
            members: (start..end).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Largest member plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.members.last().map_or(0, |m| m + 1)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (mut a, mut b) = (self.members.iter().peekable(), other.members.iter().peekable());
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }

    /// Errors if any member is outside `[0, vertex_count)`.
    pub fn check_within(&self, vertex_count: usize) -> Result<(), RggError> {
        match self.members.last() {
            Some(&m) if m >= vertex_count => Err(RggError::Domain(format!(
                "vertex {m} outside graph of {vertex_count} vertices"
            ))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Bitmask over a vertex range, one bit per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMask {
    words: Vec<u64>,
}

impl VertexMask {
    pub fn from_set(set: &VertexSet, vertex_count: usize) -> Self {
        let mut words = vec![0u64; vertex_count.div_ceil(64)];
        for v in set.iter() {
            words[v / 64] |= 1 << (v % 64);
        }
        Self { words }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Rows of an adjacency relation restricted to a column set, packed 64
/// columns per word. Row `k` holds the neighbors of `rows[k]` among `cols`,
/// with bit `c` standing for `cols[c]`.
#[derive(Debug, Clone)]
pub struct PackedRows {
    rows: Vec<usize>,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl PackedRows {
    /// Builds rows by evaluating `adjacent(row, col)` for every pair.
    pub fn build(
        rows: &[usize],
        cols: &VertexSet,
        adjacent: impl Fn(usize, usize) -> bool + Sync,
    ) -> Self {
        use rayon::prelude::*;
        let words_per_row = cols.len().div_ceil(64).max(1);
        let mut bits = vec![0u64; rows.len() * words_per_row];
        bits.par_chunks_mut(words_per_row)
            .zip(rows.par_iter())
            .for_each(|(out, &r)| {
                for (c, col) in cols.iter().enumerate() {
                    if col != r && adjacent(r, col) {
                        out[c / 64] |= 1 << (c % 64);
                    }
                }
            });
        Self {
            rows: rows.to_vec(),
            words_per_row,
            bits,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn vertex(&self, k: usize) -> usize {
        self.rows[k]
    }

    pub fn row(&self, k: usize) -> &[u64] {
        &self.bits[k * self.words_per_row..(k + 1) * self.words_per_row]
    }

    /// Number of neighbors of row `k` inside the column set.
    pub fn count(&self, k: usize) -> usize {
        self.row(k).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of common neighbors of rows `a` and `b` inside the column set.
    #[inline]
    pub fn common(&self, a: usize, b: usize) -> usize {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }
}
