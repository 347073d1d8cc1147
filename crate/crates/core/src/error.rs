use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("range error: {what} (norm {norm:e})")]
    Range { what: String, norm: f64 },

    #[error("numerical ambiguity: {message} (sample {sample:?})")]
    NumericalAmbiguity { message: String, sample: Vec<f64> },

    #[error("property violation: {0}")]
    PropertyViolation(String),

    #[error("ambiguous midpoint for pair {pair}: {count} solutions")]
    Ambiguity { pair: String, count: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}
