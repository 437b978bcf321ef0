use thiserror::Error;

use crate::dynamics::SimState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("normal trace violated: max |v.n| = {max:.3e} exceeds tolerance {tol:.3e}")]
    NormalTrace { max: f64, tol: f64 },

    #[error("divergence-free predicate violated: max |div v| = {max:.3e} exceeds tolerance {tol:.3e}")]
    Divergence { max: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("unsupported boundary condition: {0}")]
    UnsupportedBoundary(String),

    #[error("CFL violation: {0}")]
    Cfl(String),

    #[error("non-finite values after step at t = {t}")]
    NonFinite { t: f64, last_good: Box<SimState> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that come from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Cfl(_) | Error::NonFinite { .. } | Error::Numerical(_) | Error::Singular(_)
        )
    }
}
