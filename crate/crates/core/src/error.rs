use thiserror::Error;

use crate::persistence_mc::PersistenceEstimate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degree {degree} exceeds capacity {cap}")]
    Capacity { degree: usize, cap: usize },

    #[error("non-finite value while evaluating at u = {u}")]
    Overflow { u: f64 },

    #[error("accuracy target not met: {0}")]
    Accuracy(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("unknown-verdict rate {rate:.3e} exceeds bound {bound:.3e}")]
    Reliability {
        rate: f64,
        bound: f64,
        partial: Box<PersistenceEstimate>,
    },

    #[error("need at least {required} usable points, got {usable}")]
    InsufficientData { usable: usize, required: usize },

    #[error("no persistent paths observed at T = {horizon}; increase trials")]
    InsufficientTrials { horizon: f64 },

    #[error("covariance factorization failed after maximal jitter (minimum eigenvalue estimate {min_eigenvalue:.3e})")]
    Conditioning { min_eigenvalue: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
