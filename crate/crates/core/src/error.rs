use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("matrices {i} and {j} do not commute (commutator norm {norm:.3e}, threshold {threshold:.3e})")]
    NonCommuting {
        i: usize,
        j: usize,
        norm: f64,
        threshold: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
