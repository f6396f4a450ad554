use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid group descriptor: {0}")]
    InvalidSpec(String),

    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("point {0:?} lies in the complement of the open dual orbit")]
    OutsideOrbit(Vec<f64>),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {error:e}")]
    Accuracy { value: f64, error: f64 },

    #[error("condition violated: {0}")]
    Condition(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("empty sampling set")]
    EmptySet,

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not a frame on the test space: A = {lower:e}, B = {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("conjugate gradient stagnated after {iterations} iterations (relative residual {residual:e})")]
    IllConditioned {
        iterations: usize,
        residual: f64,
        partial: Box<crate::grid::SampledFunction>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
