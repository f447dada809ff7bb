use thiserror::Error;

/// Errors surfaced by the numerical routines, the solver and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An oracle produced output that contradicts its own contract, e.g. a
    /// negative Frank-Wolfe gap.
    #[error("oracle violation: {0}")]
    OracleViolation(String),

    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("line search failed after {trials} trials (last L = {last_l:e})")]
    LineSearch { trials: usize, last_l: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
