//! Simulation laboratory for self-guided quantum tomography.
//!
//! The crate is organised bottom-up:
//!
//! - [`qcore`]: exact state and operator algebra for one and two qubits.
//! - [`measure`]: simulated photon-counting measurement backends, waveplate
//!   optics and the entangled-pair source model.
//! - [`sgqt`]: the SPSA-driven self-guided estimator.
//! - [`sqt`]: the standard-tomography baseline (linear inversion and MLE).
//! - [`bench`]: experiment definitions, statistics and result files.

pub mod bench;
pub mod error;
pub mod measure;
pub mod qcore;
pub mod sgqt;
pub mod sqt;

pub use error::{Error, Result};
