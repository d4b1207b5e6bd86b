use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    InvalidShape(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("non-finite values during {0}")]
    NumericalFailure(String),

    #[error("training diverged at epoch {0}")]
    DivergedAtEpoch(usize),

    #[error("model file parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;
