use thiserror::Error;

#[derive(Debug, Error)]
pub enum KefError {
    /// Bad grid sizes, unsupported dimension, malformed config.
    #[error("configuration error: {0}")]
    Config(String),

    /// Operation applied outside its mathematical domain
    /// (positivity lost, log of a non-positive density, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input violates a stated consistency requirement
    /// (e.g. Poisson source with nonzero mass).
    #[error("inconsistency error: {0}")]
    Inconsistency(String),

    /// Box-truncation tail bound above the run tolerance.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// Iterative solver failed to meet its tolerance.
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, KefError>;
