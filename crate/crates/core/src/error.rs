use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A kernel, history or basis violates a structural invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The input is well-formed but the numerics could not produce a trustworthy result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Material document does not match the schema.
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("incompatible kernels: {0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
