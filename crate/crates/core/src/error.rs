use thiserror::Error;

/// Errors produced by the pricing library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Levy variance whose log argument is not positive (negative weights).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate proxy: {0}")]
    DegenerateProxy(String),

    #[error("strike derivative of order {order} undefined at zero variance")]
    DerivativeUndefined { order: u8 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("reduction error: {0}")]
    Reduction(String),
}

pub type Result<T> = std::result::Result<T, PricingError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PricingError {
    PricingError::InvalidArgument(msg.into())
}
