//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands live on different qubit counts or vector lengths disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Requested size exceeds a configured capacity cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Input violates a domain precondition (e.g. p > n).
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or configuration parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Numerical input failed validation (non-unit vector, non-Hermitian matrix, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Iterative method did not converge; carries the best achieved residual or gap.
    #[error("no convergence: {message} (residual {residual:.3e})")]
    Convergence { message: String, residual: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
