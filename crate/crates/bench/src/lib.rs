//! Benchmark-only crate; see `benches/` for the Criterion targets.
//!
//! * `flow` — exact semigroup evaluation on ladder graphs with fine
//!   partitions, and the measure flow with many atoms.
//! * `spectral` — power-iteration spectral projection and imprimitivity on
//!   medium graphs.
