//! Engine-level errors. Law violations are not errors (they go into
//! [`crate::report::ValidationReport`]s); these are the conditions that stop
//! an operation from producing a result at all.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    /// An enumeration left the configured universe; the payload names the
    /// bound and the datum that crossed it.
    #[error("truncation: {0}")]
    Truncation(String),

    /// The fibre backend cannot perform the requested computation.
    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),

    /// A referenced object, morphism or fibre does not exist.
    #[error("not found: {0}")]
    NotFound(String),

    /// Malformed input data.
    #[error("invalid: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
