use thiserror::Error;

/// Errors produced by the bound engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition was violated (unsorted input, bad lengths...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A prior, channel or hypothesis specification failed validation.
    #[error("invalid specification: {0}")]
    Invalid(String),

    /// The operation is not defined for this prior variant.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The prior density is not regular enough (e.g. Fisher information undefined).
    #[error("regularity: {0}")]
    Regularity(String),

    /// Adaptive quadrature ran out of budget before reaching its tolerance.
    #[error("quadrature did not converge: estimate {partial} with error estimate {error_estimate:e}")]
    Convergence { partial: f64, error_estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
