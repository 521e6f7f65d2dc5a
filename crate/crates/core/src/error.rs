use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the documented parameter range.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A point or matrix outside the domain of the operation
    /// (chamber boundary, non-positive pivot, support violation).
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative routine failed to converge or a computed object
    /// violated one of its structural invariants.
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
