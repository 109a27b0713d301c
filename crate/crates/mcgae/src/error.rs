use thiserror::Error;

/// Errors produced by dataset handling, model evaluation and training.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraints.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data violates a structural invariant (labels, cutoffs, shapes).
    #[error("invalid data: {0}")]
    Data(String),

    /// Tensor or vector dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Shape(String),

    /// A metric or threshold is undefined for the given inputs.
    #[error("undefined value: {0}")]
    Undefined(String),

    /// Training or evaluation produced a non-finite number.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Reading or writing an artifact failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// An on-disk artifact could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
