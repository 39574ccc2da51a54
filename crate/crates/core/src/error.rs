use thiserror::Error;

/// Errors produced by the preference-learning engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The Gram matrix could not be factorized, even after jitter.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("mode search did not converge after {iterations} iterations (gradient max-norm {grad_norm:e})")]
    FitFailure { iterations: usize, grad_norm: f64 },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
