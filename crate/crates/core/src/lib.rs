//! Exact simulation and spectral analysis of transport semigroups on metric
//! graphs.
//!
//! A finite directed graph with rational edge weights (outgoing weights
//! summing to 1 at every vertex) carries a transport flow: material moves
//! along each edge at unit speed and is redistributed at vertices by the
//! column-stochastic junction operator `B`.  This crate evaluates that flow
//! *exactly* in rational arithmetic on three state spaces — `L¹` edge
//! profiles, `L∞` bounds on them, and finite signed measures — and analyses
//! its long-run behaviour through the spectrum of `B`:
//!
//! * [`graph`] — graph description, validation, incidence matrices and the
//!   junction operator;
//! * [`operator`] — exact sparse/dense linear algebra over the rationals;
//! * [`step`] — step-function profiles on edges, the `L¹`/`L∞` state spaces;
//! * [`flow`] — the semigroup `T(t)`, periodicity defects, decay-rate
//!   reports, the resolvent of the generator, and eigenflow verification;
//! * [`spectral`] — irreducibility, the imprimitivity index (= asymptotic
//!   period), peripheral spectrum, spectral projection and attractor
//!   certificates;
//! * [`rescale`] — rational edge velocities reduced to the unit-speed flow by
//!   exact subdivision and conjugation;
//! * [`measure`] — the measure-valued flow, atoms versus densities, weak*
//!   continuity probes;
//! * [`template`] / [`random`] — reproducible example families and seeded
//!   random strongly-connected graphs.
//!
//! Floating point enters only where spectra genuinely require it (power
//! iteration, decay-rate fits, resolvent sums); every semigroup evaluation,
//! norm, and certificate is computed in exact rational arithmetic.

pub mod error;
pub mod flow;
pub mod graph;
pub mod measure;
pub mod operator;
pub mod random;
pub mod ratio;
pub mod rescale;
pub mod spectral;
pub mod step;
pub mod template;

pub use error::{Error, ValidationReport, Violation};
pub use flow::{
    defect, defect_series, eigenflow_check, evaluate_t, periodicity_report, resolvent,
    simulation_series, EigenflowReport, PeriodicityReport, PeriodicitySample, ResolventOutput,
    SeriesRow,
};
pub use graph::{build_operators, Edge, EdgeId, GraphSpec, IncidenceMatrices, VertexId};
pub use measure::{
    embed, evaluate_s, nilpotent_shift, shift, weakstar_continuity_probe, ComponentMeasure,
    EdgeMeasure, PiecewiseLinear, ProbeRow, TestFunction,
};
pub use operator::{ColumnStochasticOperator, SparseVec};
pub use random::{
    random_disconnected, random_mixed, random_strongly_connected, RandomGraphConfig,
};
pub use ratio::{format_f64, format_ratio, parse_ratio, q, qi, split_time, to_f64, Q};
pub use rescale::{
    conjugated_evaluate_tc, conjugated_period, stretch, subdivide, subdivided_period, unstretch,
    SubdivisionMap, SubdivisionReport,
};
pub use spectral::{
    find_attractor, imprimitivity_index, is_irreducible, is_strongly_connected_vertices, one_norm,
    spectral_projection, verify_attractor, AttractorCertificate, PeripheralEigenvalue,
    SpectralDecomposition, DEFAULT_PROJECTION_MAX_ITER, DEFAULT_PROJECTION_TOL,
};
pub use step::{EdgeStepFunction, StepFunction};
pub use template::{truncate, truncate_seeded, GraphTemplate};
