use thiserror::Error;

/// Errors produced by construction-time validation and by operations
/// whose preconditions cannot be checked by the type system alone.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or vector argument violates its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// Shapes of two related arrays disagree.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    /// The operation is not defined for this input variant.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
