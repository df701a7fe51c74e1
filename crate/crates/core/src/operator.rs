//! The weighted transposed adjacency operator `B` on edge space.
//!
//! `B` acts on finitely supported vectors indexed by edges; its entry
//! `B[i][j]` is the weight of edge `i` exactly when edge `i` continues edge
//! `j` (the head of `j` is the tail of `i`).  Columns sum to 1, so `B` is a
//! lattice isometry on the positive cone of ℓ¹ and all exact computations stay
//! in rational arithmetic.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::graph::GraphSpec;
use crate::ratio::Q;

/// A finitely supported exact rational vector indexed by edge indices.
///
/// The representation is canonical: zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseVec {
    entries: BTreeMap<usize, Q>,
}

impl SparseVec {
    /// The zero vector.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a vector from `(index, value)` pairs, dropping zeros and summing
    /// duplicated indices.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, Q)>) -> Self {
        let mut v = Self::default();
        for (i, x) in entries {
            v.add_to(i, &x);
        }
        v
    }

    /// The value at `index` (zero when absent).
    pub fn get(&self, index: usize) -> Q {
        self.entries.get(&index).cloned().unwrap_or_else(Q::zero)
    }

    /// Adds `value` to the entry at `index`, keeping the representation canonical.
    pub fn add_to(&mut self, index: usize, value: &Q) {
        if value.is_zero() {
            return;
        }
        let slot = self.entries.entry(index).or_insert_with(Q::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&index);
        }
    }

    /// Iterates over `(index, value)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.entries.iter().map(|(i, x)| (*i, x))
    }

    /// Support size.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// True for the zero vector.
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest index in the support, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// ℓ¹ norm `Σ |v_i|`, exact.
    pub fn l1_norm(&self) -> Q {
        self.entries.values().map(Signed::abs).sum()
    }

    /// Sum of entries (signed), exact.
    pub fn sum(&self) -> Q {
        self.entries.values().cloned().sum()
    }

    /// Returns `self + scale * other`, exact.
    pub fn add_scaled(&self, other: &Self, scale: &Q) -> Self {
        let mut out = self.clone();
        for (i, x) in other.iter() {
            out.add_to(i, &(x * scale));
        }
        out
    }

    /// Scales every entry, exact.
    pub fn scaled(&self, scale: &Q) -> Self {
        if scale.is_zero() {
            return Self::zero();
        }
        Self { entries: self.entries.iter().map(|(i, x)| (*i, x * scale)).collect() }
    }
}

/// The edge-space operator `B` with exact rational entries, stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnStochasticOperator {
    dim: usize,
    /// `cols[j]` lists `(row, entry)` pairs of column `j`, sorted by row.
    cols: Vec<Vec<(usize, Q)>>,
}

impl ColumnStochasticOperator {
    /// Builds `B` from a graph (callers should validate the graph first; see
    /// [`crate::graph::build_operators`]).
    pub(crate) fn from_graph(spec: &GraphSpec) -> Self {
        let m = spec.edge_count();
        let mut out_edges_of: Vec<Vec<usize>> = vec![Vec::new(); spec.vertex_count()];
        for (i, e) in spec.edges.iter().enumerate() {
            out_edges_of[e.tail.0].push(i);
        }
        let mut cols = vec![Vec::new(); m];
        for (j, e) in spec.edges.iter().enumerate() {
            for &i in &out_edges_of[e.head.0] {
                cols[j].push((i, spec.edges[i].weight.clone()));
            }
        }
        Self { dim: m, cols }
    }

    /// Builds an operator directly from dense rational columns (used by the
    /// subdivision construction and by tests).
    pub fn from_columns(columns: Vec<Vec<Q>>) -> Result<Self, Error> {
        let dim = columns.len();
        let mut cols = vec![Vec::new(); dim];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: col.len() });
            }
            for (i, x) in col.iter().enumerate() {
                if !x.is_zero() {
                    cols[j].push((i, x.clone()));
                }
            }
        }
        Ok(Self { dim, cols })
    }

    /// Number of edges (the operator acts on ℓ¹ over `0..dim`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `(row, entry)` pairs of column `j`.
    pub fn column(&self, j: usize) -> &[(usize, Q)] {
        &self.cols[j]
    }

    /// Exact column sums; all equal to 1 for operators built from valid graphs.
    pub fn column_sums(&self) -> Vec<Q> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|(_, x)| x.clone()).sum())
            .collect()
    }

    /// Arcs `(j, i)` of the support digraph: `j -> i` when `B[i][j] != 0`,
    /// i.e. edge `i` can receive material from edge `j`.
    pub fn support_arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, _)| (j, *i)))
    }

    /// Applies `B` once: `y = B x`, exact.
    pub fn apply(&self, x: &SparseVec) -> Result<SparseVec, Error> {
        if let Some(max) = x.max_index() {
            if max >= self.dim {
                return Err(Error::EdgeIndexOutOfRange { index: max, dim: self.dim });
            }
        }
        let mut y = SparseVec::zero();
        for (j, xj) in x.iter() {
            for (i, b) in &self.cols[j] {
                y.add_to(*i, &(b * xj));
            }
        }
        Ok(y)
    }

    /// Applies `B` `n` times, exact.
    pub fn apply_power(&self, x: &SparseVec, n: usize) -> Result<SparseVec, Error> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    /// Dense exact form, row-major: `entry[i][j] = B[i][j]`.
    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut dense = vec![vec![Q::zero(); self.dim]; self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, x) in col {
                dense[*i][j] = x.clone();
            }
        }
        dense
    }

    /// Dense float form as an `nalgebra` matrix.
    pub fn to_dense_f64(&self) -> nalgebra::DMatrix<f64> {
        let mut dense = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for (i, x) in col {
                dense[(*i, j)] = crate::ratio::to_f64(x);
            }
        }
        dense
    }

    /// Exact dense `n`-th power of `B` (the identity for `n = 0`).
    pub fn dense_power(&self, n: usize) -> Vec<Vec<Q>> {
        let mut acc = identity_dense(self.dim);
        let dense = self.to_dense();
        for _ in 0..n {
            acc = mat_mul_exact(&acc, &dense);
        }
        acc
    }
}

/// Exact dense identity matrix.
pub fn identity_dense(dim: usize) -> Vec<Vec<Q>> {
    let mut id = vec![vec![Q::zero(); dim]; dim];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    id
}

/// Exact dense matrix product `a * b`.
pub fn mat_mul_exact(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let p = if b.is_empty() { 0 } else { b[0].len() };
    let mut out = vec![vec![Q::zero(); p]; n];
    for (i, arow) in a.iter().enumerate() {
        for (k, aik) in arow.iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if !bkj.is_zero() {
                    out[i][j] += aik * bkj;
                }
            }
        }
    }
    out
}
