use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid robot model: {0}")]
    ModelValidation(String),

    /// Cholesky factorization failed on every rung of the jitter ladder.
    #[error("numerical failure: {message} (jitter ladder tried: {jitter_ladder:?})")]
    NumericalFailure {
        message: String,
        jitter_ladder: Vec<f64>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure {
            message: msg.into(),
            jitter_ladder: Vec::new(),
        }
    }

    /// True for failures of the numerical kind (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
