use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hurst index must lie in (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("parameters outside the supported domain: {0}")]
    UnsupportedDomain(&'static str),

    #[error("invalid quadrature specification: {0}")]
    InvalidSpec(&'static str),

    #[error("quadrature did not converge (best estimate {estimate}, error bound {error})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("numerical degeneracy: {0}")]
    Degenerate(&'static str),

    #[error("regime error: {0}")]
    Regime(&'static str),

    #[error("power-law fit failed: {0}")]
    FitFailure(&'static str),

    #[error("invalid observed path: {0}")]
    InvalidPath(&'static str),

    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
