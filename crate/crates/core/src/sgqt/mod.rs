//! Self-guided tomography: SPSA ascent of a measured objective over pure
//! states.
//!
//! One qubit ascends the projector expectation `⟨φ|ρ|φ⟩` directly. Two
//! qubits ascend a fidelity estimate built from a random subset of Pauli
//! correlators, since the local analysis optics cannot project onto an
//! entangled state.

mod gains;
mod objective;
mod run;
mod spsa;

pub use gains::GainSchedule;
pub use objective::{
    importance_weighted_fidelity, partial_fidelity, sample_pauli_subset, PauliSubset,
    SubsetSampling, DENOMINATOR_FLOOR,
};
pub use run::{
    run_sgqt, IterationRecord, Objective, PartialFidelityMode, RunRecord, SgqtConfig,
    DEGENERATE_RETRIES,
};
pub use spsa::{gradient_estimate, perturb, step, Perturbation};
