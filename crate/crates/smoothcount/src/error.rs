use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Estimated or actual work exceeded the caller's budget; use an
    /// estimator instead of an exact count.
    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A coefficient table covering the requested bound has not been built.
    #[error("needs precompute: {0}")]
    NeedsPrecompute(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("corrupt table: {0}")]
    CorruptTable(String),

    #[error("unsupported version: {0}")]
    UnsupportedVersion(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
