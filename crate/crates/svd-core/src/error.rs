use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvdError {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid rank {requested} (valid range 1..={available})")]
    InvalidRank { requested: usize, available: usize },

    #[error("shape mismatch: {0}")]
    InvalidShape(String),

    #[error("svd failed to converge after {iterations} sweeps")]
    NumericalFailure { iterations: usize },
}

pub type Result<T> = std::result::Result<T, SvdError>;
