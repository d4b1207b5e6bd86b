use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("shape mismatch: {0}")]
    InvalidShape(String),

    #[error("invalid architecture spec: {0}")]
    InvalidSpec(String),

    #[error("gridded scenario data required: {0}")]
    GridRequired(String),

    #[error("training diverged at epoch {0}")]
    DivergedAtEpoch(usize),

    #[error("model file parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error(transparent)]
    Nn(#[from] nn_core::NnError),

    #[error(transparent)]
    Svd(#[from] svd_core::SvdError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OperatorError>;
