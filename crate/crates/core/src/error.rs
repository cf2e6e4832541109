use thiserror::Error;

use crate::quad::QuadError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mixing matrix is not unitary (max |UU^dag - 1| entry = {max_deviation:e})")]
    NonUnitary { max_deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {max_deviation:e})")]
    NonHermitian { max_deviation: f64 },

    #[error("density matrix is not a positive unit-trace operator: {0}")]
    NonPositiveState(String),

    #[error("wavefunction norm {norm} differs from 1")]
    NotNormalized { norm: f64 },

    #[error(transparent)]
    QuadratureFailure(#[from] QuadError),

    #[error("integration did not converge: {0}")]
    NonConvergent(String),

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("curves are sampled on different grids")]
    GridMismatch,

    #[error("damped-cosine fit failed: {0}")]
    FitFailure(String),
}

impl Error {
    /// Numerical failures, as opposed to bad input or a violated regime.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure(_) | Error::NonConvergent(_) | Error::FitFailure(_)
        )
    }
}
