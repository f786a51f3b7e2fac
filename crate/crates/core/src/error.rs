use thiserror::Error;

/// Errors produced across the tomography pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate perturbation: updated amplitude vector has norm {norm:e}")]
    DegeneratePerturbation { norm: f64 },

    #[error("objective undefined: every Pauli term fell below the denominator floor {floor:e}")]
    ObjectiveUndefined { floor: f64 },

    #[error("tomography set is not informationally complete (rank {rank} < {required})")]
    InvalidSet { rank: usize, required: usize },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("run aborted at iteration {iteration}: {reason}")]
    RunAborted { iteration: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
