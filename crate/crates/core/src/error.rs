use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed a parameter outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An evaluation point coincides with (or is too close to) the integration
    /// surface, where the kernel is singular.
    #[error("singular configuration: {0}")]
    Singularity(String),

    /// A quadrature did not reach the requested tolerance within the panel
    /// budget. Carries the achieved error estimate.
    #[error("quadrature did not converge: estimate {estimate:e} > tol {tol:e}")]
    ConvergenceFailure { estimate: f64, tol: f64 },

    /// The projected Galerkin system is numerically singular.
    #[error("projected system numerically singular (cond {cond:e})")]
    NonUniqueness { cond: f64 },

    /// A target value cannot be represented (e.g. a Rayleigh target outside
    /// the numerical range hull).
    #[error("not representable: {0}")]
    NotRepresentable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
