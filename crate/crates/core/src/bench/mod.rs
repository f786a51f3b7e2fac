//! Experiment definitions, the parallel runner and summary statistics.
//!
//! An [`ExperimentSpec`] names one of the benchmark experiments with its
//! targets, photon budget, gains and conditions. [`run_experiment`] expands it
//! into independent (target, condition, repetition) cells and pairs each SGQT
//! trial with its SQT baseline.

mod runner;
mod spec;
mod stats;

pub use runner::{
    conditions, derive_seed, fixed_budget_label, matched_budget_lambda, matched_budget_sqt,
    run_experiment, summarize, CheckpointSummary, Condition, ConditionSummary, ExperimentResult,
    MissingCell, SqtArm, SqtRecord, TrajectoryRow, TrialRecord, MIN_PHOTONS_PER_PROJECTOR,
};
pub use spec::{
    BenchmarkMode, ExperimentKind, ExperimentSpec, PhotonSpec, TargetSpec, DEFAULT_TARGET_SEED,
};
pub use stats::{infidelity_reduction, median, SummaryStats};
