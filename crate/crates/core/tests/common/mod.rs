//! Shared fixtures, generators, and independent oracles for the
//! acceptance-criteria suite.
//!
//! Oracles here deliberately avoid the production code paths they check:
//! peripheral counts and subdominant moduli come from a dense eigenvalue
//! solver, attractor coverage from explicit walk enumeration, and the
//! resolvent from direct Laplace quadrature of the evaluated flow.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semiflow::{
    evaluate_t, q, qi, to_f64, ColumnStochasticOperator, ComponentMeasure, Edge, EdgeId,
    EdgeMeasure, EdgeStepFunction, GraphSpec, StepFunction, VertexId, Q,
};

fn edge(id: usize, tail: usize, head: usize, weight: Q) -> Edge {
    Edge { id: EdgeId(id), tail: VertexId(tail), head: VertexId(head), weight, velocity: None }
}

/// Two vertices, two edges; the junction operator swaps them.
pub fn g2() -> GraphSpec {
    GraphSpec {
        vertices: vec![VertexId(0), VertexId(1)],
        edges: vec![edge(0, 0, 1, qi(1)), edge(1, 1, 0, qi(1))],
    }
}

/// [`g2`] with velocities `(1, 1/2)`.
pub fn g2_velocities() -> GraphSpec {
    let mut spec = g2();
    spec.edges[0].velocity = Some(qi(1));
    spec.edges[1].velocity = Some(q(1, 2));
    spec
}

/// The aperiodic 3-vertex, 4-edge fixture: a 2-cycle and a 3-cycle sharing
/// the branching at `v1`.
pub fn g3() -> GraphSpec {
    GraphSpec {
        vertices: vec![VertexId(0), VertexId(1), VertexId(2)],
        edges: vec![
            edge(0, 0, 1, qi(1)),
            edge(1, 1, 0, q(1, 2)),
            edge(2, 1, 2, q(1, 2)),
            edge(3, 2, 0, qi(1)),
        ],
    }
}

/// Dense complex eigenvalues of the junction operator (float oracle).
pub fn eigenvalues(op: &ColumnStochasticOperator) -> Vec<(f64, f64)> {
    let m: DMatrix<f64> = op.to_dense_f64();
    m.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

/// Number of eigenvalues with modulus above `1 - 1e-6`.
pub fn peripheral_count(eigs: &[(f64, f64)]) -> usize {
    eigs.iter().filter(|(re, im)| re.hypot(*im) > 1.0 - 1e-6).count()
}

/// Largest modulus strictly inside the peripheral band (0 when the spectrum
/// is entirely peripheral).
pub fn subdominant_modulus(eigs: &[(f64, f64)]) -> f64 {
    eigs.iter()
        .map(|(re, im)| re.hypot(*im))
        .filter(|m| *m <= 1.0 - 1e-6)
        .fold(0.0, f64::max)
}

/// Direct Laplace quadrature `∫₀^T e^{-λt} (T(t)f)(s) dt` per edge.
///
/// For fixed `s` the integrand is piecewise constant in `t` (breaks where
/// `s + t` crosses a breakpoint of `f` or an integer), so each piece
/// integrates in closed form; only the exponentials are floating point.
pub fn laplace_quadrature(
    op: &ColumnStochasticOperator,
    lambda: f64,
    f: &EdgeStepFunction,
    s: &Q,
    t_max: f64,
) -> Vec<f64> {
    let dim = op.dim();
    let (breaks, sections) = f.global_sections();
    let mut powered = sections;
    let mut total = vec![0.0; dim];
    let s_f = to_f64(s);
    let mut lap = 0usize;
    loop {
        let lap_f = lap as f64;
        if lap_f - s_f >= t_max {
            break;
        }
        // In lap `lap`, the reading point u = s + t - lap runs over
        // [s, 1) for lap 0 and [0, 1) afterwards.
        let u_start = if lap == 0 { s.clone() } else { Q::zero() };
        for (idx, w) in breaks.windows(2).enumerate() {
            let lo = if w[0] < u_start { &u_start } else { &w[0] };
            if lo >= &w[1] {
                continue;
            }
            let t1 = (lap_f + to_f64(lo) - s_f).max(0.0);
            let t2 = (lap_f + to_f64(&w[1]) - s_f).min(t_max);
            if t1 >= t2 {
                continue;
            }
            let factor = ((-lambda * t1).exp() - (-lambda * t2).exp()) / lambda;
            for (j, v) in powered[idx].iter() {
                total[j] += to_f64(v) * factor;
            }
        }
        powered = powered
            .iter()
            .map(|sec| op.apply(sec).expect("dimension fixed"))
            .collect();
        lap += 1;
    }
    total
}

/// Exhaustive walk enumeration: total weight of walks from `start` of length
/// `1..=max_len` ending inside `w`.  Independent of the matrix recursion used
/// by the production certifier.
pub fn walk_coverage(spec: &GraphSpec, w: &[usize], start: usize, max_len: usize) -> Q {
    let mut arcs: Vec<Vec<(usize, Q)>> = vec![Vec::new(); spec.vertex_count()];
    for e in &spec.edges {
        arcs[e.tail.0].push((e.head.0, e.weight.clone()));
    }
    let in_w: Vec<bool> = (0..spec.vertex_count()).map(|v| w.contains(&v)).collect();
    let mut total = Q::zero();
    let mut stack: Vec<(usize, usize, Q)> = vec![(start, 0, Q::one())];
    while let Some((u, depth, weight)) = stack.pop() {
        if depth == max_len {
            continue;
        }
        for (v, arc_weight) in &arcs[u] {
            let acc = &weight * arc_weight;
            if in_w[*v] {
                total += &acc;
            }
            stack.push((*v, depth + 1, acc));
        }
    }
    total
}

/// A seeded generator for random rational step data and times.
pub struct DataGen {
    rng: ChaCha8Rng,
}

impl DataGen {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A random rational in `[0, 1)` with denominator at most 12.
    fn unit_ratio(&mut self) -> Q {
        let den = self.rng.gen_range(2..=12i64);
        let num = self.rng.gen_range(0..den);
        q(num, den)
    }

    /// A random nonnegative rational time `n + p/q` with `n <= 2`.
    pub fn time(&mut self) -> Q {
        let n = self.rng.gen_range(0..=2i64);
        qi(n) + self.unit_ratio()
    }

    /// A random small signed rational value (possibly zero).
    fn value(&mut self) -> Q {
        q(self.rng.gen_range(-6..=6), self.rng.gen_range(1..=4))
    }

    /// A random step function with at most three cells.
    pub fn step_function(&mut self) -> StepFunction {
        let mut cuts: Vec<Q> = (0..self.rng.gen_range(0..=2usize))
            .map(|_| self.unit_ratio())
            .filter(|c| !c.is_zero())
            .collect();
        cuts.sort();
        cuts.dedup();
        let mut breaks = vec![Q::zero()];
        breaks.extend(cuts);
        breaks.push(Q::one());
        let cell_count = breaks.len() - 1;
        let values: Vec<Q> = (0..cell_count).map(|_| self.value()).collect();
        StepFunction::new(breaks, values).expect("generated partition is valid")
    }

    /// A random edge profile over `dim` edges with a few active components.
    pub fn edge_function(&mut self, dim: usize) -> EdgeStepFunction {
        let mut f = EdgeStepFunction::zero(dim);
        let active = self.rng.gen_range(1..=dim.min(3));
        for _ in 0..active {
            let edge = self.rng.gen_range(0..dim);
            f.set_component(edge, self.step_function()).expect("edge in range");
        }
        f
    }

    /// Like [`DataGen::edge_function`] but with strictly nonnegative values.
    pub fn positive_edge_function(&mut self, dim: usize) -> EdgeStepFunction {
        let mut f = self.edge_function(dim);
        let edges: Vec<usize> = f.active_edges().collect();
        for j in edges {
            let comp = f.component(j).expect("active").clone();
            let breaks = comp.breaks().to_vec();
            let values: Vec<Q> = comp.values().iter().map(|v| v.abs() + q(1, 7)).collect();
            f.set_component(j, StepFunction::new(breaks, values).expect("same partition"))
                .expect("edge in range");
        }
        f
    }

    /// A random measure mixing atoms and densities.
    pub fn measure(&mut self, dim: usize) -> EdgeMeasure {
        let mut mu = EdgeMeasure::zero(dim);
        let active = self.rng.gen_range(1..=dim.min(3));
        for _ in 0..active {
            let edge = self.rng.gen_range(0..dim);
            let atoms: Vec<(Q, Q)> = (0..self.rng.gen_range(0..=2usize))
                .map(|_| (self.unit_ratio(), self.value()))
                .collect();
            let density =
                if self.rng.gen_bool(0.5) { self.step_function() } else { StepFunction::zero() };
            let comp = ComponentMeasure::new(atoms, density).expect("positions in range");
            mu.set_component(edge, comp).expect("edge in range");
        }
        mu
    }

    /// A random strictly positive measure.
    pub fn positive_measure(&mut self, dim: usize) -> EdgeMeasure {
        let mut mu = EdgeMeasure::zero(dim);
        let active = self.rng.gen_range(1..=dim.min(3));
        for _ in 0..active {
            let edge = self.rng.gen_range(0..dim);
            let atoms: Vec<(Q, Q)> = (0..self.rng.gen_range(0..=2usize))
                .map(|_| (self.unit_ratio(), self.value().abs() + q(1, 5)))
                .collect();
            let comp = ComponentMeasure::new(atoms, StepFunction::constant(q(1, 3)))
                .expect("positions in range");
            mu.set_component(edge, comp).expect("edge in range");
        }
        mu
    }

}

/// Convenience: evaluate the flow and unwrap.
pub fn flow(op: &ColumnStochasticOperator, t: &Q, f: &EdgeStepFunction) -> EdgeStepFunction {
    evaluate_t(op, t, f).expect("valid evaluation")
}
