use thiserror::Error;

/// Errors produced by the estimation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative numerical method failed to converge or a residual
    /// bound was not met.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The estimator could not produce the requested number of DOAs.
    #[error("estimation failure: {0}")]
    Estimation(String),

    /// Two independent computations of the same quantity disagreed.
    #[error("inconsistent dual computation: {0}")]
    Inconsistency(String),

    /// An even-element array did not show the real-axis root pair it
    /// is guaranteed to have.
    #[error("even-element root theorem violated: {0}")]
    TheoremViolation(String),

    /// Invalid configuration file or command-line arguments.
    #[error("config error: {0}")]
    Config(String),

    /// A self-verification oracle failed.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
