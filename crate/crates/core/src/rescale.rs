//! Reduction of rational edge velocities to the unit-velocity flow.
//!
//! A graph whose edge `j` carries velocity `c_j` is traversed in time
//! `1 / c_j`.  Choosing the smallest positive integer `c` with every
//! `ℓ_j = c / c_j` a positive integer and splitting edge `j` into `ℓ_j`
//! unit-velocity sub-edges produces a combinatorially larger graph whose
//! standard flow, run at `c` times the original speed, is conjugate to the
//! original one:
//!
//! ```text
//! T_C(τ) = S⁻¹ T_sub(c · τ) S,
//! ```
//!
//! where the stretching map `S` transplants an edge profile onto the chain of
//! sub-edges with the Jacobian folded in, making it an isometry of `L¹`.
//! Everything here is exact; the conjugated flow inherits the exactness of
//! the unit-velocity evaluator.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::flow::evaluate_t;
use crate::graph::{build_operators, Edge, EdgeId, GraphSpec, VertexId};
use crate::operator::ColumnStochasticOperator;
use crate::ratio::{ratio_serde, Q};
use crate::step::{EdgeStepFunction, StepFunction};

/// Largest admissible number of sub-edges produced by [`subdivide`].
pub const MAX_SUBDIVIDED_EDGES: usize = 200_000;

/// The exact correspondence between a velocity graph and its unit-velocity
/// subdivision.
#[derive(Debug, Clone)]
pub struct SubdivisionMap {
    /// Time-rescaling factor: the subdivided flow runs `c` times faster.
    pub c: Q,
    /// Sub-edges per original edge (`ℓ_j = c / c_j`).
    pub l: Vec<usize>,
    /// The original velocity graph.
    pub original: GraphSpec,
    /// The unit-velocity subdivision.
    pub subdivided: GraphSpec,
    /// `index_map[j]` lists the sub-edge ids of original edge `j`, ordered
    /// from the tail towards the head.
    pub index_map: Vec<Vec<EdgeId>>,
    /// Junction operator of the subdivided graph.
    pub op_sub: ColumnStochasticOperator,
}

/// Serializable summary of a [`SubdivisionMap`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdivisionReport {
    /// Time-rescaling factor.
    #[serde(with = "ratio_serde")]
    pub c: Q,
    /// Sub-edges per original edge.
    pub l: Vec<usize>,
    /// Total edges in the subdivision.
    pub new_edge_count: usize,
    /// Sub-edge ids per original edge, tail to head.
    pub index_map: Vec<Vec<usize>>,
}

impl SubdivisionMap {
    /// The serializable summary.
    pub fn report(&self) -> SubdivisionReport {
        SubdivisionReport {
            c: self.c.clone(),
            l: self.l.clone(),
            new_edge_count: self.subdivided.edge_count(),
            index_map: self
                .index_map
                .iter()
                .map(|ids| ids.iter().map(|id| id.0).collect())
                .collect(),
        }
    }
}

/// Builds the unit-velocity subdivision of a velocity graph.
///
/// `c` is the least common multiple of the velocity numerators (in lowest
/// terms), the smallest positive integer making every `ℓ_j = c / c_j` a
/// positive integer.  Edge `j` becomes a chain of `ℓ_j` sub-edges: the one at
/// the tail keeps the original routing weight, interior pass-through edges
/// get weight 1, and interior vertices are appended after the original ones.
pub fn subdivide(spec: &GraphSpec) -> Result<SubdivisionMap, Error> {
    let report = spec.validate();
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report));
    }
    if let Some(edge) = spec.edges.iter().find(|e| e.velocity.is_none()) {
        return Err(Error::MissingVelocity { edge: edge.id.0 });
    }

    let mut c = num_bigint::BigInt::one();
    for e in &spec.edges {
        let velocity = e.velocity.as_ref().expect("checked above");
        c = c.lcm(velocity.numer());
    }
    let c = Q::from_integer(c);

    let mut l = Vec::with_capacity(spec.edge_count());
    let mut total = 0usize;
    for e in &spec.edges {
        let ratio = &c / e.velocity.as_ref().expect("checked above");
        debug_assert!(ratio.is_integer() && ratio.is_positive());
        let lj = ratio
            .to_integer()
            .to_usize()
            .ok_or(Error::SubdivisionTooLarge { new_edges: usize::MAX, cap: MAX_SUBDIVIDED_EDGES })?;
        total += lj;
        if total > MAX_SUBDIVIDED_EDGES {
            return Err(Error::SubdivisionTooLarge { new_edges: total, cap: MAX_SUBDIVIDED_EDGES });
        }
        l.push(lj);
    }

    let n = spec.vertex_count();
    let mut vertices: Vec<VertexId> = (0..n).map(VertexId).collect();
    let mut edges: Vec<Edge> = Vec::with_capacity(total);
    let mut index_map: Vec<Vec<EdgeId>> = Vec::with_capacity(spec.edge_count());
    for (e, &lj) in spec.edges.iter().zip(&l) {
        let mut ids = Vec::with_capacity(lj);
        let mut tail = e.tail;
        for m in 0..lj {
            let head = if m + 1 == lj {
                e.head
            } else {
                let fresh = VertexId(vertices.len());
                vertices.push(fresh);
                fresh
            };
            let id = EdgeId(edges.len());
            ids.push(id);
            edges.push(Edge {
                id,
                tail,
                head,
                weight: if m == 0 { e.weight.clone() } else { Q::one() },
                velocity: None,
            });
            tail = head;
        }
        index_map.push(ids);
    }
    let subdivided = GraphSpec { vertices, edges };
    let (_, op_sub) = build_operators(&subdivided)?;
    Ok(SubdivisionMap { c, l, original: spec.clone(), subdivided, index_map, op_sub })
}

/// The isometric stretching map `S`: transplants an original edge profile
/// onto the sub-edge chain.
///
/// Sub-edge `m` (counted from the tail) carries the slice
/// `s ∈ [(ℓ−1−m)/ℓ, (ℓ−m)/ℓ)` of the original parameter, rescaled to its own
/// unit interval with the factor `1/ℓ` folded into the values so that mass is
/// preserved slice by slice.
pub fn stretch(map: &SubdivisionMap, f: &EdgeStepFunction) -> Result<EdgeStepFunction, Error> {
    let dim = map.original.edge_count();
    if f.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: f.dim() });
    }
    let mut out = EdgeStepFunction::zero(map.subdivided.edge_count());
    for j in f.active_edges() {
        let component = f.component(j).expect("active edge has a component");
        let lj = map.l[j];
        let l_q = Q::from_integer((lj as i64).into());
        let inv_l = Q::one() / &l_q;
        for (m, id) in map.index_map[j].iter().enumerate() {
            // Window [(ℓ−1−m)/ℓ, (ℓ−m)/ℓ) in the original parameter.
            let offset = Q::from_integer(((lj - 1 - m) as i64).into()) / &l_q;
            let window_hi = &offset + &inv_l;
            let mut breaks = vec![Q::zero()];
            for b in component.breaks() {
                if *b > offset && *b < window_hi {
                    breaks.push((b - &offset) * &l_q);
                }
            }
            breaks.push(Q::one());
            let values: Vec<Q> = breaks[..breaks.len() - 1]
                .iter()
                .map(|sigma| {
                    let s = &offset + sigma * &inv_l;
                    component.value_at(&s).expect("window point in range") * &inv_l
                })
                .collect();
            out.set_component(id.0, StepFunction::new(breaks, values)?)?;
        }
    }
    Ok(out)
}

/// The inverse of [`stretch`]: folds a profile on the subdivided graph back
/// onto the original edges.
pub fn unstretch(map: &SubdivisionMap, g: &EdgeStepFunction) -> Result<EdgeStepFunction, Error> {
    let dim_sub = map.subdivided.edge_count();
    if g.dim() != dim_sub {
        return Err(Error::DimensionMismatch { expected: dim_sub, got: g.dim() });
    }
    let mut out = EdgeStepFunction::zero(map.original.edge_count());
    for (j, ids) in map.index_map.iter().enumerate() {
        let lj = map.l[j];
        let l_q = Q::from_integer((lj as i64).into());
        if ids.iter().all(|id| g.component(id.0).is_none()) {
            continue;
        }
        let mut breaks = vec![Q::zero(), Q::one()];
        for (m, id) in ids.iter().enumerate() {
            let offset = Q::from_integer(((lj - 1 - m) as i64).into()) / &l_q;
            breaks.push(offset.clone());
            if let Some(component) = g.component(id.0) {
                for sigma in component.breaks() {
                    if !sigma.is_zero() && !sigma.is_one() {
                        breaks.push(&offset + sigma / &l_q);
                    }
                }
            }
        }
        breaks.sort();
        breaks.dedup();
        let values: Vec<Q> = breaks[..breaks.len() - 1]
            .iter()
            .map(|s| {
                // Invert s = (ℓ−1−m+σ)/ℓ for the sub-edge index m at s.
                let scaled = s * &l_q;
                let floor = scaled.floor();
                let m = lj - 1 - floor.to_integer().to_usize().expect("s in [0, 1)");
                let sigma = &scaled - &floor;
                match g.component(ids[m].0) {
                    Some(component) => {
                        component.value_at(&sigma).expect("sigma in range") * &l_q
                    }
                    None => Q::zero(),
                }
            })
            .collect();
        out.set_component(j, StepFunction::new(breaks, values)?)?;
    }
    Ok(out)
}

/// Evaluates the velocity flow exactly through the conjugation
/// `T_C(τ) = S⁻¹ T_sub(c · τ) S`.
pub fn conjugated_evaluate_tc(
    map: &SubdivisionMap,
    t: &Q,
    f: &EdgeStepFunction,
) -> Result<EdgeStepFunction, Error> {
    let stretched = stretch(map, f)?;
    let moved = evaluate_t(&map.op_sub, &(&map.c * t), &stretched)?;
    unstretch(map, &moved)
}

/// Asymptotic period of the subdivided unit-velocity flow (its imprimitivity
/// index).
pub fn subdivided_period(map: &SubdivisionMap) -> Result<usize, Error> {
    crate::spectral::imprimitivity_index(&map.op_sub)
}

/// Asymptotic period of the original velocity flow: the subdivided period
/// compressed by the time rescaling, `θ_C = θ_sub / c`.
pub fn conjugated_period(map: &SubdivisionMap) -> Result<Q, Error> {
    let theta_sub = subdivided_period(map)?;
    Ok(Q::from_integer((theta_sub as i64).into()) / &map.c)
}
