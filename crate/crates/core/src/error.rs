use thiserror::Error;

/// Errors raised by the solvers and checkers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A validity constraint failed. `lhs` must exceed `rhs` (or reach it, for
    /// non-strict constraints) for the input to be accepted.
    #[error("constraint `{name}` violated: {lhs} vs {rhs}")]
    Constraint {
        name: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("invalid coefficient: {0}")]
    Coefficient(String),

    #[error("{0} matrix is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("grid too coarse: {0}")]
    Refine(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("need {needed} eigenvalues, only {available} available")]
    Insufficient { needed: usize, available: usize },

    #[error("{value} lies beyond the computed range (largest eigenvalue {max})")]
    OutOfRange { value: f64, max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
