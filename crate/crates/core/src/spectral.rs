//! Spectral structure of the edge operator: irreducibility, imprimitivity,
//! attractor certificates, and the peripheral spectral projection.

use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{GraphSpec, VertexId};
use crate::operator::ColumnStochasticOperator;
use crate::ratio::Q;

/// Default stopping tolerance for the projection power iteration.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;
/// Default iteration cap for the projection power iteration.
pub const DEFAULT_PROJECTION_MAX_ITER: usize = 200_000;
/// Longest trailing window (in `B^k` steps) used to fit the subdominant
/// contraction factor from successive-difference norms.
pub const RHO_FIT_WINDOW: usize = 40;

/// True iff the support digraph of `B` on edge indices is strongly connected.
///
/// This coincides with strong connectivity of the underlying vertex graph
/// because the support digraph is its line digraph.
pub fn is_irreducible(op: &ColumnStochasticOperator) -> bool {
    let mut g = petgraph::graph::DiGraph::<(), ()>::with_capacity(op.dim(), 0);
    let nodes: Vec<_> = (0..op.dim()).map(|_| g.add_node(())).collect();
    for (j, i) in op.support_arcs() {
        g.add_edge(nodes[j], nodes[i], ());
    }
    petgraph::algo::tarjan_scc(&g).len() == 1 && op.dim() > 0
}

/// True iff the vertex graph is strongly connected.
pub fn is_strongly_connected_vertices(spec: &GraphSpec) -> bool {
    let mut g = petgraph::graph::DiGraph::<(), ()>::with_capacity(spec.vertex_count(), 0);
    let nodes: Vec<_> = (0..spec.vertex_count()).map(|_| g.add_node(())).collect();
    for e in &spec.edges {
        g.add_edge(nodes[e.tail.0], nodes[e.head.0], ());
    }
    petgraph::algo::tarjan_scc(&g).len() == 1 && spec.vertex_count() > 0
}

/// The imprimitivity index `k`: the gcd of the lengths of all directed cycles
/// of the support digraph of `B`.
///
/// Computed with BFS potential labels: after a breadth-first labelling
/// `level(...)` from node 0, `k = gcd over arcs (u, v) of |level(u) + 1 -
/// level(v)|`.  Requires irreducibility (every node on a cycle), otherwise
/// [`Error::ReducibleOperator`] is returned.
pub fn imprimitivity_index(op: &ColumnStochasticOperator) -> Result<usize, Error> {
    if !is_irreducible(op) {
        return Err(Error::ReducibleOperator);
    }
    let dim = op.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for (j, i) in op.support_arcs() {
        adj[j].push(i);
    }
    let mut level = vec![i64::MIN; dim];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if level[v] == i64::MIN {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g: i64 = 0;
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            g = g.gcd(&(level[u] + 1 - level[v]));
        }
    }
    Ok(g as usize)
}

/// A finite-reach certificate for the attractor property.
///
/// For every vertex `v`, the sum of the weights of all directed paths of
/// length between 1 and `l` that start at `v` and end in `w` is at least
/// `delta > 0` (a path's weight is the product of its edge weights).  The
/// empty path does not count, so vertices inside `w` also need a genuine
/// return path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttractorCertificate {
    /// The attracting vertex set.
    pub w: Vec<VertexId>,
    /// Maximal path length needed.
    pub l: usize,
    /// Exact minimal accumulated path weight over all vertices.
    pub delta: Q,
}

/// Searches for an attractor certificate.
///
/// Deterministic search order: singleton sets `{v}` in vertex-id order first
/// (so the reported certificate has the smallest `l` among singletons, ties
/// broken by the smaller vertex id); if no singleton certifies within
/// `max_len`, vertices are added greedily in decreasing in-degree order
/// (ties by id) until the growing set certifies or exceeds `max_size`.
/// Returns `None` when nothing certifies within the bounds.
pub fn find_attractor(
    spec: &GraphSpec,
    max_len: usize,
    max_size: usize,
) -> Option<AttractorCertificate> {
    let n = spec.vertex_count();
    if n == 0 || max_size == 0 || max_len == 0 {
        return None;
    }
    let adj = spec.vertex_adjacency();

    let mut best: Option<AttractorCertificate> = None;
    for v in 0..n {
        if let Some((l, delta)) = certify(&adj, &[v], max_len) {
            let better = match &best {
                None => true,
                Some(b) => l < b.l,
            };
            if better {
                best = Some(AttractorCertificate { w: vec![VertexId(v)], l, delta });
            }
        }
    }
    if best.is_some() {
        return best;
    }

    let mut in_degree = vec![0usize; n];
    for e in &spec.edges {
        in_degree[e.head.0] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(in_degree[v]), v));
    let mut w: Vec<usize> = Vec::new();
    for v in order {
        w.push(v);
        if w.len() > max_size {
            return None;
        }
        if w.len() >= 2 {
            if let Some((l, delta)) = certify(&adj, &w, max_len) {
                let mut ids: Vec<VertexId> = w.iter().map(|&v| VertexId(v)).collect();
                ids.sort();
                return Some(AttractorCertificate { w: ids, l, delta });
            }
        }
    }
    None
}

/// Exhaustive re-check of a certificate: accumulated path weights are summed
/// with the same matrix recursion and compared against `delta`.
pub fn verify_attractor(spec: &GraphSpec, cert: &AttractorCertificate) -> bool {
    let w: Vec<usize> = cert.w.iter().map(|v| v.0).collect();
    match certify(&spec.vertex_adjacency(), &w, cert.l) {
        Some((l, delta)) => l <= cert.l && delta >= cert.delta,
        None => false,
    }
}

/// Accumulated path-weight coverage of `w`: returns the smallest `l <=
/// max_len` at which every vertex has positive accumulated weight into `w`,
/// together with the exact minimum at that `l`.
fn certify(adj: &[Vec<Q>], w: &[usize], max_len: usize) -> Option<(usize, Q)> {
    let n = adj.len();
    let mut indicator = vec![Q::zero(); n];
    for &v in w {
        indicator[v] = Q::from_integer(1.into());
    }
    // reach = M^l * 1_w, cumulative = sum over path lengths 1..=l.
    let mut reach = indicator;
    let mut cumulative = vec![Q::zero(); n];
    for l in 1..=max_len {
        let mut next = vec![Q::zero(); n];
        for (u, row) in adj.iter().enumerate() {
            let mut acc = Q::zero();
            for (v, weight) in row.iter().enumerate() {
                if !weight.is_zero() && !reach[v].is_zero() {
                    acc += weight * &reach[v];
                }
            }
            next[u] = acc;
        }
        reach = next;
        for (c, r) in cumulative.iter_mut().zip(&reach) {
            *c += r;
        }
        if cumulative.iter().all(|c| c.is_positive()) {
            let delta = cumulative.iter().min().cloned();
            return delta.map(|d| (l, d));
        }
    }
    None
}

/// A peripheral eigenvalue, reported as a point on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeripheralEigenvalue {
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

/// The peripheral spectral decomposition of an irreducible `B`.
///
/// `projection` approximates the spectral projection `P` onto the peripheral
/// eigenspaces, obtained as the limit of `B^(k m)`; `residual` estimates
/// `‖B^(k m*) - P‖₁` at the stopping iterate (so `‖P² - P‖₁` and
/// `‖BP - PB‖₁` are at most a small multiple of it), and `rho` estimates the
/// subdominant spectral radius from the asymptotic ratio of successive
/// iterate differences, averaged over a trailing window of up to
/// [`RHO_FIT_WINDOW`] steps so that the phase rotation of complex subdominant
/// pairs cancels out.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Imprimitivity index `k`.
    pub k: usize,
    /// The peripheral spectrum: exactly the `k`-th roots of unity.
    pub peripheral: Vec<PeripheralEigenvalue>,
    /// Floating approximation of the peripheral spectral projection.
    pub projection: DMatrix<f64>,
    /// Estimated subdominant spectral radius (0 when convergence was exact).
    pub rho: f64,
    /// Estimated distance of the stopping iterate from the true projection.
    pub residual: f64,
    /// Number of `B^k` factors applied (the stopping iterate is `B^(k*iterations)`).
    pub iterations: usize,
    /// Trailing steps actually used to estimate `rho` (0 when convergence was
    /// exact and no ratio information exists).
    pub fit_window: usize,
}

/// Max-column-sum (operator ℓ¹) norm of a dense float matrix.
pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes the peripheral projection of an irreducible operator by power
/// iteration on `B^k`, stopping once successive iterates differ by less than
/// `tol` in the ℓ¹ operator norm.
pub fn spectral_projection(
    op: &ColumnStochasticOperator,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralDecomposition, Error> {
    let k = imprimitivity_index(op)?;
    let bf = op.to_dense_f64();
    let mut bk = DMatrix::identity(op.dim(), op.dim());
    for _ in 0..k {
        bk = &bk * &bf;
    }

    let mut m = bk.clone();
    let mut iterations = 1usize;
    let mut diffs: Vec<f64> = Vec::new();
    loop {
        let next = &m * &bk;
        let diff = one_norm(&(&next - &m));
        m = next;
        iterations += 1;
        diffs.push(diff);
        if diff < tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations, residual: diff });
        }
    }

    let last = *diffs.last().unwrap_or(&0.0);
    // Contraction factor of B^k on the complement: the per-step geometric
    // mean of the decay across a wide trailing window.  A single ratio (or a
    // narrow window) is biased when the subdominant eigenvalues form a
    // complex pair, because the difference norms oscillate with the rotation
    // phase; averaging over many steps cancels that phase.
    let trailing = diffs.iter().rev().take_while(|d| **d > 0.0).count();
    let fit_window = trailing.saturating_sub(1).min(RHO_FIT_WINDOW);
    let q_hat = if last > 0.0 && fit_window > 0 {
        let start = diffs[diffs.len() - 1 - fit_window];
        (last / start).powf(1.0 / fit_window as f64).clamp(0.0, 0.999)
    } else {
        0.0
    };
    let rho = if last == 0.0 || q_hat == 0.0 { 0.0 } else { q_hat.powf(1.0 / k as f64) };
    let residual = if last == 0.0 {
        0.0
    } else if q_hat == 0.0 {
        last
    } else {
        last * q_hat / (1.0 - q_hat)
    };

    let peripheral = (0..k)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
            PeripheralEigenvalue { re: angle.cos(), im: angle.sin() }
        })
        .collect();

    Ok(SpectralDecomposition { k, peripheral, projection: m, rho, residual, iterations, fit_window })
}
