//! Weighted directed metric graphs and their structural validation.
//!
//! A [`GraphSpec`] describes a finite directed graph in which every edge is a
//! copy of the unit interval, carries a strictly positive rational weight, and
//! optionally a strictly positive rational velocity.  Validity requires:
//!
//! * dense 0-based vertex and edge ids,
//! * simplicity (no loops, no repeated `(tail, head)` pair),
//! * non-degeneracy (every vertex has at least one incoming and one outgoing
//!   edge), and
//! * outgoing weights summing to exactly 1 at every vertex.
//!
//! Transport semigroup material flows along each edge from its *tail* towards
//! its *head*; the edge parameter runs the opposite way (1 at the tail, 0 at
//! the head), so shifting the parameter forward moves material towards the
//! head.

use serde::{Deserialize, Serialize};

use crate::error::{Error, ValidationReport, Violation};
use crate::operator::ColumnStochasticOperator;
use crate::ratio::{format_ratio, ratio_serde, ratio_serde_opt, Q};

/// Identifier of a vertex; valid graphs use dense ids `0..n-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

/// Identifier of an edge; valid graphs use dense ids `0..m-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl std::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A directed edge with its rational weight and optional velocity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    /// Edge id; equals the edge's index in a valid graph.
    pub id: EdgeId,
    /// Vertex the edge leaves (material enters the edge here).
    pub tail: VertexId,
    /// Vertex the edge enters (material exits the edge here).
    pub head: VertexId,
    /// Strictly positive routing weight attached to this edge at its tail.
    #[serde(with = "ratio_serde")]
    pub weight: Q,
    /// Optional strictly positive velocity; `None` means unit velocity.
    #[serde(default, with = "ratio_serde_opt", skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Q>,
}

/// A finite weighted directed metric graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    /// Vertex ids; dense `0..n-1` in a valid graph.
    pub vertices: Vec<VertexId>,
    /// Edge list; ids dense `0..m-1` in a valid graph.
    pub edges: Vec<Edge>,
}

impl GraphSpec {
    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Checks every structural invariant and reports all violations found.
    ///
    /// Violations are data, not errors: an invalid graph still produces a
    /// complete report in a deterministic order (id density first, then
    /// per-edge checks, then per-vertex checks).
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.vertices.len();

        if let Some(pos) = self.vertices.iter().enumerate().find(|(i, v)| v.0 != *i) {
            violations.push(Violation::VertexIdsNotDense { position: pos.0 });
        }
        if let Some(pos) = self.edges.iter().enumerate().find(|(i, e)| e.id.0 != *i) {
            violations.push(Violation::EdgeIdsNotDense { position: pos.0 });
        }

        let mut seen_pairs: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut velocity_with: Option<usize> = None;
        let mut velocity_without: Option<usize> = None;
        for (i, e) in self.edges.iter().enumerate() {
            for v in [e.tail, e.head] {
                if v.0 >= n {
                    violations.push(Violation::UnknownVertex { edge: i, vertex: v.0 });
                }
            }
            if e.tail == e.head {
                violations.push(Violation::LoopEdge { edge: i });
            }
            if let Some(&first) = seen_pairs.get(&(e.tail.0, e.head.0)) {
                violations.push(Violation::DuplicateEdge { first, second: i });
            } else {
                seen_pairs.insert((e.tail.0, e.head.0), i);
            }
            if e.weight <= Q::from_integer(0.into()) {
                violations.push(Violation::NonPositiveWeight { edge: i });
            }
            match &e.velocity {
                Some(c) => {
                    velocity_with.get_or_insert(i);
                    if *c <= Q::from_integer(0.into()) {
                        violations.push(Violation::NonPositiveVelocity { edge: i });
                    }
                }
                None => {
                    velocity_without.get_or_insert(i);
                }
            }
        }
        if let (Some(with), Some(without)) = (velocity_with, velocity_without) {
            violations.push(Violation::PartialVelocities { with, without });
        }

        let mut out_sum = vec![Q::from_integer(0.into()); n];
        let mut has_out = vec![false; n];
        let mut has_in = vec![false; n];
        for e in &self.edges {
            if e.tail.0 < n {
                out_sum[e.tail.0] += &e.weight;
                has_out[e.tail.0] = true;
            }
            if e.head.0 < n {
                has_in[e.head.0] = true;
            }
        }
        for v in 0..n {
            if !has_out[v] {
                violations.push(Violation::MissingOutgoing { vertex: v });
            }
            if !has_in[v] {
                violations.push(Violation::MissingIncoming { vertex: v });
            }
            if has_out[v] && out_sum[v] != Q::from_integer(1.into()) {
                violations.push(Violation::OutgoingWeightSum {
                    vertex: v,
                    sum: format_ratio(&out_sum[v]),
                });
            }
        }

        ValidationReport { violations }
    }

    /// True when [`GraphSpec::validate`] finds no violations.
    pub fn is_valid(&self) -> bool {
        self.validate().is_valid()
    }

    /// True when all edges carry a velocity.
    pub fn has_velocities(&self) -> bool {
        !self.edges.is_empty() && self.edges.iter().all(|e| e.velocity.is_some())
    }

    /// Serializes the graph to pretty JSON (weights and velocities as `"p/q"`).
    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a graph from its JSON form.  The result is not yet validated.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    /// Vertex-level weighted adjacency: `entry[u][v]` is the weight of the
    /// edge `u -> v`, or zero when absent (valid graphs are simple, so at most
    /// one edge per ordered pair exists).
    pub fn vertex_adjacency(&self) -> Vec<Vec<Q>> {
        let n = self.vertices.len();
        let zero = Q::from_integer(0.into());
        let mut adj = vec![vec![zero; n]; n];
        for e in &self.edges {
            adj[e.tail.0][e.head.0] = e.weight.clone();
        }
        adj
    }
}

/// The three incidence matrices of a validated graph, each `vertices x edges`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrices {
    /// `outgoing[v][e] = 1` iff vertex `v` is the tail of edge `e`.
    pub outgoing: Vec<Vec<u8>>,
    /// `incoming[v][e] = 1` iff vertex `v` is the head of edge `e`.
    pub incoming: Vec<Vec<u8>>,
    /// `weighted_outgoing[v][e] = weight(e)` iff `v` is the tail of `e`, else 0.
    pub weighted_outgoing: Vec<Vec<Q>>,
}

impl IncidenceMatrices {
    fn build(spec: &GraphSpec) -> Self {
        let n = spec.vertex_count();
        let m = spec.edge_count();
        let zero = Q::from_integer(0.into());
        let mut outgoing = vec![vec![0u8; m]; n];
        let mut incoming = vec![vec![0u8; m]; n];
        let mut weighted_outgoing = vec![vec![zero; m]; n];
        for (j, e) in spec.edges.iter().enumerate() {
            outgoing[e.tail.0][j] = 1;
            incoming[e.head.0][j] = 1;
            weighted_outgoing[e.tail.0][j] = e.weight.clone();
        }
        Self { outgoing, incoming, weighted_outgoing }
    }
}

/// Validates `spec` and assembles its incidence matrices together with the
/// weighted transposed adjacency operator `B` acting on edge space.
///
/// `B[i][j] = weight(e_i)` exactly when the head of `e_j` is the tail of
/// `e_i`; columns of `B` then sum to 1 because outgoing weights sum to 1 at
/// every vertex.
pub fn build_operators(spec: &GraphSpec) -> Result<(IncidenceMatrices, ColumnStochasticOperator), Error> {
    let report = spec.validate();
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report));
    }
    let incidence = IncidenceMatrices::build(spec);
    let op = ColumnStochasticOperator::from_graph(spec);
    Ok((incidence, op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g2, g3};
    use crate::ratio::{q, qi};

    fn edge(id: usize, tail: usize, head: usize, weight: Q) -> Edge {
        Edge { id: EdgeId(id), tail: VertexId(tail), head: VertexId(head), weight, velocity: None }
    }

    #[test]
    fn g2_and_g3_validate_cleanly() {
        assert!(g2().is_valid());
        assert!(g3().is_valid());
    }

    #[test]
    fn detects_loop_and_duplicate() {
        let spec = GraphSpec {
            vertices: vec![VertexId(0), VertexId(1)],
            edges: vec![
                edge(0, 0, 0, qi(1)),
                edge(1, 0, 1, qi(1)),
                edge(2, 0, 1, qi(1)),
                edge(3, 1, 0, qi(1)),
            ],
        };
        let report = spec.validate();
        assert!(report.violations.contains(&Violation::LoopEdge { edge: 0 }));
        assert!(report.violations.contains(&Violation::DuplicateEdge { first: 1, second: 2 }));
    }

    #[test]
    fn detects_weight_sum_violation() {
        let spec = GraphSpec {
            vertices: vec![VertexId(0), VertexId(1)],
            edges: vec![edge(0, 0, 1, q(1, 2)), edge(1, 1, 0, qi(1))],
        };
        let report = spec.validate();
        assert_eq!(
            report.violations,
            vec![Violation::OutgoingWeightSum { vertex: 0, sum: "1/2".into() }]
        );
    }

    #[test]
    fn detects_degeneracy() {
        let spec = GraphSpec {
            vertices: vec![VertexId(0), VertexId(1), VertexId(2)],
            edges: vec![edge(0, 0, 1, qi(1)), edge(1, 1, 0, qi(1))],
        };
        let report = spec.validate();
        assert!(report.violations.contains(&Violation::MissingOutgoing { vertex: 2 }));
        assert!(report.violations.contains(&Violation::MissingIncoming { vertex: 2 }));
    }

    #[test]
    fn detects_non_dense_ids() {
        let spec = GraphSpec {
            vertices: vec![VertexId(0), VertexId(2)],
            edges: vec![edge(5, 0, 1, qi(1)), edge(1, 1, 0, qi(1))],
        };
        let report = spec.validate();
        assert!(report.violations.contains(&Violation::VertexIdsNotDense { position: 1 }));
        assert!(report.violations.contains(&Violation::EdgeIdsNotDense { position: 0 }));
    }

    #[test]
    fn detects_partial_velocities() {
        let mut spec = g2();
        spec.edges[0].velocity = Some(qi(1));
        let report = spec.validate();
        assert!(report
            .violations
            .contains(&Violation::PartialVelocities { with: 0, without: 1 }));
    }

    #[test]
    fn json_roundtrip_is_identical() {
        let mut spec = g3();
        spec.edges[1].velocity = Some(q(1, 2));
        spec.edges[0].velocity = Some(qi(1));
        spec.edges[2].velocity = Some(q(2, 3));
        spec.edges[3].velocity = Some(qi(2));
        let text = spec.to_json().unwrap();
        let back = GraphSpec::from_json(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn incidence_matrices_of_g3() {
        let (inc, _) = build_operators(&g3()).unwrap();
        // e0: v0 -> v1, e1: v1 -> v0, e2: v1 -> v2, e3: v2 -> v0
        assert_eq!(inc.outgoing, vec![vec![1, 0, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 0, 1]]);
        assert_eq!(inc.incoming, vec![vec![0, 1, 0, 1], vec![1, 0, 0, 0], vec![0, 0, 1, 0]]);
        assert_eq!(inc.weighted_outgoing[1], vec![qi(0), q(1, 2), q(1, 2), qi(0)]);
    }

    #[test]
    fn build_operators_rejects_invalid() {
        let spec = GraphSpec {
            vertices: vec![VertexId(0), VertexId(1)],
            edges: vec![edge(0, 0, 1, q(1, 3)), edge(1, 1, 0, qi(1))],
        };
        match build_operators(&spec) {
            Err(Error::InvalidGraph(report)) => assert_eq!(report.violations.len(), 1),
            other => panic!("expected InvalidGraph, got {other:?}"),
        }
    }
}
