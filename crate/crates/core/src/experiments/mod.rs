//! Seeded statistical experiments.
//!
//! Each experiment is a deterministic function of (configuration, master
//! seed) to an [`ExperimentReport`](crate::report::ExperimentReport): rerunning
//! with the same inputs reproduces the report body byte for byte, regardless
//! of the worker pool. Ensemble members get independent child streams of the
//! master seed; per-mode draws are keyed by the mode index, so scans over the
//! cutoff N are coupled — every run sees the *same* realization ω on the
//! modes it keeps (verifiable by coefficient comparison).
//!
//! Monte Carlo aggregation follows one discipline: member results are
//! collected in index order and reduced sequentially (sums), or combined by
//! order-independent operations (max, counts), never by racing accumulators.

mod convergence;
mod invariance;
mod measure;
mod recurrence;

pub use convergence::{
    cauchy_convergence_experiment, renormalized_convergence_experiment, ConvergenceConfig,
};
pub use invariance::{invariance_experiment, InvarianceConfig, Observable};
pub use measure::{
    large_deviation_experiment, measure_construction_experiment, LargeDeviationConfig,
    MeasureConstructionConfig,
};
pub use recurrence::{recurrence_experiment, RecurrenceConfig};
