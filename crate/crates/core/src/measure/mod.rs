//! Simulated measurements of a true state.
//!
//! Besides the optimizer's own perturbation and subset draws, this module is
//! the only source of randomness in the pipeline: Poisson photon numbers,
//! binomial/multinomial detector clicks, and Gaussian waveplate errors.

mod backend;
mod bell;
pub mod jones;

pub use backend::{
    AccountingMode, ErrorRedraw, MeasurementBackend, Outcome, PhotonBudgetConfig,
    WaveplateErrorModel,
};
pub use bell::{bell_state, BellSourceModel};
pub use jones::{
    jones_matrix, projector_to_waveplate_angles, JonesMatrix, PlateKind, WaveplateSetting,
};
