use thiserror::Error;

/// Errors raised by the region engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid input: {0}")]
    Domain(String),

    #[error("missing mutual-information atoms: {}", .0.join(", "))]
    MissingAtoms(Vec<String>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
