use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Hypothesis violations (a generator that does not preserve W, a group that
/// does not act abelianly) are errors here only when an operation *requires*
/// the hypothesis; [`crate::bounds::verify_instance`] reports them as
/// structured diagnoses instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the mathematical domain (n < 2, m < 1, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Shapes, dimensions or moduli that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),
    /// A configured cap would be exceeded.
    #[error("capacity exceeded: {what} (cap {cap})")]
    Capacity { what: String, cap: usize },
    /// A hypothesis of the bounds (invariance, abelian action) fails.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// Malformed external input (JSON files).
    #[error("invalid input: {0}")]
    Input(String),
    /// Something that cannot happen unless the library has a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Input(err.to_string())
    }
}
