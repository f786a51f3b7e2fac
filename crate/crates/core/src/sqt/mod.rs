//! Standard tomography baseline: a fixed informationally complete set of
//! projectors, linear inversion, and maximum-likelihood estimation.

mod linear;
mod mle;
mod set;

pub use linear::{linear_inversion, project_to_physical};
pub use mle::{
    log_likelihood, mle_estimate, mle_estimate_with, CholeskyParams, MleOptions, MleResult,
};
pub use set::{acquire_counts, CountEntry, CountVector, TomographySet};

use crate::error::{Error, Result};
use crate::measure::MeasurementBackend;
use crate::qcore::{fidelity, DensityMatrix};

/// Result of one standard-tomography reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct SqtOutcome {
    pub estimate: DensityMatrix,
    pub photons_used: u64,
    pub fidelity: f64,
    pub counts: CountVector,
    pub mle_converged: bool,
}

/// Acquires counts, reconstructs by MLE and scores against `benchmark`.
pub fn run_sqt(
    backend: &mut MeasurementBackend,
    set: &TomographySet,
    benchmark: &DensityMatrix,
) -> Result<SqtOutcome> {
    if benchmark.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: benchmark.dim(),
        });
    }
    let before = backend.photons_consumed();
    let counts = acquire_counts(backend, set)?;
    let mle = mle_estimate(&counts, set)?;
    Ok(SqtOutcome {
        fidelity: fidelity(&mle.state, benchmark)?,
        estimate: mle.state,
        photons_used: backend.photons_consumed() - before,
        counts,
        mle_converged: mle.converged,
    })
}
