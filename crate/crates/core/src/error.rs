use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A caller-side precondition (e.g. constant smoothness) does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A covariance matrix that must be positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("feasibility is not monotone in rho near {rho}")]
    NonMonotone { rho: f64 },

    #[error("no feasible point found: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
