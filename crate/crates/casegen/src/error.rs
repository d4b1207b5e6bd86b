use thiserror::Error;

#[derive(Debug, Error)]
pub enum CasegenError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("scenarios must share one grid: {0}")]
    GridRequired(String),

    #[error("non-finite state at t = {t}")]
    NumericalFailure { t: f64 },

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("metadata file missing: {0}")]
    MetaMissing(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error(transparent)]
    Snapshot(#[from] svd_core::SvdError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CasegenError>;
