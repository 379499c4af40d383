use thiserror::Error;

/// Errors raised by the opoly algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An index or size lies outside the horizon of the data it refers to.
    #[error("range error: {0}")]
    Range(String),
    /// An argument is outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Parameters violate a structural constraint (e.g. the k = 2 family relations).
    #[error("constraint violated: {0}")]
    Constraint(String),
    /// A quantity that must be nonzero vanished (within tolerance).
    #[error("degenerate: {0}")]
    Degeneracy(String),
    /// The operation needs a passing orthogonality report that is absent or failed.
    #[error("state error: {0}")]
    State(String),
    /// An iterative numerical method failed.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Two routes to the same object disagree beyond tolerance.
    #[error("inconsistent: {0}")]
    Inconsistency(String),
    /// The input is too ill-conditioned for the requested computation.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),
    /// The question has no meaning for this input (e.g. quadrature on complex nodes).
    #[error("inapplicable: {0}")]
    Inapplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
