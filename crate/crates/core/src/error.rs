use thiserror::Error;

/// Errors raised by the calculus.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument outside the admissible domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("generators do not commute: residual {residual:.3e} exceeds {threshold:.3e}")]
    NonCommuting { residual: f64, threshold: f64 },

    #[error("semigroup is not bounded: {0}")]
    Unbounded(String),

    #[error("operator tuple carries no spectral data")]
    MissingSpectralData,

    #[error("no subordinator family is known for {0}")]
    NoSubordinator(String),

    #[error("degenerate basis draw after {0} attempts")]
    DegenerateBasis(usize),

    #[error("grid touches the boundary s = 0")]
    GridOnBoundary,
}

pub type Result<T> = std::result::Result<T, Error>;
