//! Error and validation-report types shared by all modules.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The graph failed structural validation; the report lists every violation.
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),
    /// An operand's edge dimension does not match the operator's.
    #[error("dimension mismatch: operator has {expected} edges, operand has {got}")]
    DimensionMismatch {
        /// Edge count of the operator.
        expected: usize,
        /// Edge count of the operand.
        got: usize,
    },
    /// A component referred to an edge index outside the graph.
    #[error("edge index {index} out of range for {dim} edges")]
    EdgeIndexOutOfRange {
        /// Offending index.
        index: usize,
        /// Number of edges.
        dim: usize,
    },
    /// Semigroup times must be nonnegative.
    #[error("time must be nonnegative, got {t}")]
    NegativeTime {
        /// Offending time.
        t: String,
    },
    /// The requested time's integer part does not fit in the power budget.
    #[error("time {t} too large for exact matrix powering")]
    TimeTooLarge {
        /// Offending time.
        t: String,
    },
    /// A `"p/q"` string (or decimal) could not be parsed.
    #[error("cannot parse rational from {text:?}")]
    ParseRatio {
        /// Offending text.
        text: String,
    },
    /// A step function's breakpoints were not a valid partition of [0, 1].
    #[error("malformed step function: {reason}")]
    MalformedStepFunction {
        /// What was wrong.
        reason: String,
    },
    /// A piecewise-linear test function was malformed.
    #[error("malformed test function: {reason}")]
    MalformedTestFunction {
        /// What was wrong.
        reason: String,
    },
    /// A measure's atoms or density were malformed.
    #[error("malformed measure: {reason}")]
    MalformedMeasure {
        /// What was wrong.
        reason: String,
    },
    /// The operator is not irreducible, but the operation requires it.
    #[error("operator is reducible (support digraph not strongly connected)")]
    ReducibleOperator,
    /// Power iteration did not reach the requested tolerance.
    #[error("power iteration did not converge within {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        /// Iterations performed.
        iterations: usize,
        /// Last successive-difference norm.
        residual: f64,
    },
    /// The resolvent series requires Re λ > 0.
    #[error("resolvent abscissa must be positive, got {lambda}")]
    NonPositiveLambda {
        /// Offending λ.
        lambda: f64,
    },
    /// The supplied (λ, v) is not an eigenpair of the operator within 1e-10.
    #[error("(lambda, v) is not an eigenpair: residual {residual:e} exceeds 1e-10 relative")]
    NotAnEigenpair {
        /// Relative residual ‖Bv − e^λ v‖₁ / ‖v‖₁.
        residual: f64,
    },
    /// Velocity rescaling requires a velocity on every edge.
    #[error("edge {edge} has no velocity; subdivision requires velocities on all edges")]
    MissingVelocity {
        /// Edge without a velocity.
        edge: usize,
    },
    /// The subdivision would produce an unreasonably large graph.
    #[error("subdivision would create {new_edges} edges, exceeding the cap of {cap}")]
    SubdivisionTooLarge {
        /// Edges the subdivision would create.
        new_edges: usize,
        /// Configured cap.
        cap: usize,
    },
    /// A shift would move mass outside [0, 1].
    #[error("shift by {t} would move support outside [0, 1]")]
    ShiftOutOfRange {
        /// Offending shift.
        t: String,
    },
    /// A template name could not be parsed.
    #[error("unknown template {name:?} (expected cycle(n), mixed-cycles(a,b), ladder, or random(n))")]
    UnknownTemplate {
        /// Offending name.
        name: String,
    },
    /// A template parameter was out of range.
    #[error("invalid template parameter: {reason}")]
    InvalidTemplateParameter {
        /// What was wrong.
        reason: String,
    },
    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Outcome of structural validation of a graph; violations are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Every violation found, in a deterministic order.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no violations were found.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let mut first = true;
        for v in &self.violations {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// A single structural violation found during validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Vertex ids must be exactly 0..n-1 in order.
    VertexIdsNotDense {
        /// Position in the vertex list where the id diverges.
        position: usize,
    },
    /// Edge ids must be exactly 0..m-1 in order.
    EdgeIdsNotDense {
        /// Position in the edge list where the id diverges.
        position: usize,
    },
    /// An edge refers to a vertex id outside 0..n-1.
    UnknownVertex {
        /// Offending edge id.
        edge: usize,
        /// The unknown vertex id.
        vertex: usize,
    },
    /// Loops (tail == head) are forbidden in simple graphs.
    LoopEdge {
        /// Offending edge id.
        edge: usize,
    },
    /// Two edges share the same (tail, head) pair.
    DuplicateEdge {
        /// First edge with the pair.
        first: usize,
        /// Second edge with the pair.
        second: usize,
    },
    /// Edge weights must be strictly positive.
    NonPositiveWeight {
        /// Offending edge id.
        edge: usize,
    },
    /// Every vertex needs at least one outgoing edge.
    MissingOutgoing {
        /// Offending vertex id.
        vertex: usize,
    },
    /// Every vertex needs at least one incoming edge.
    MissingIncoming {
        /// Offending vertex id.
        vertex: usize,
    },
    /// Outgoing weights at a vertex must sum to exactly 1.
    OutgoingWeightSum {
        /// Offending vertex id.
        vertex: usize,
        /// The actual sum, as `"p/q"`.
        sum: String,
    },
    /// Velocities must be strictly positive when present.
    NonPositiveVelocity {
        /// Offending edge id.
        edge: usize,
    },
    /// Velocities must be given on all edges or none.
    PartialVelocities {
        /// An edge with a velocity.
        with: usize,
        /// An edge without one.
        without: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexIdsNotDense { position } => {
                write!(f, "vertex ids are not dense 0..n-1 (first divergence at position {position})")
            }
            Violation::EdgeIdsNotDense { position } => {
                write!(f, "edge ids are not dense 0..m-1 (first divergence at position {position})")
            }
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "edge {edge} refers to unknown vertex {vertex}")
            }
            Violation::LoopEdge { edge } => write!(f, "edge {edge} is a loop"),
            Violation::DuplicateEdge { first, second } => {
                write!(f, "edges {first} and {second} duplicate the same (tail, head) pair")
            }
            Violation::NonPositiveWeight { edge } => {
                write!(f, "edge {edge} has a non-positive weight")
            }
            Violation::MissingOutgoing { vertex } => {
                write!(f, "vertex {vertex} has no outgoing edge")
            }
            Violation::MissingIncoming { vertex } => {
                write!(f, "vertex {vertex} has no incoming edge")
            }
            Violation::OutgoingWeightSum { vertex, sum } => {
                write!(f, "outgoing weights at vertex {vertex} sum to {sum}, not 1")
            }
            Violation::NonPositiveVelocity { edge } => {
                write!(f, "edge {edge} has a non-positive velocity")
            }
            Violation::PartialVelocities { with, without } => {
                write!(f, "edge {with} has a velocity but edge {without} does not")
            }
        }
    }
}
