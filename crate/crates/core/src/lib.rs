//! Prediction law of fractional Brownian motion.
//!
//! Given the path of a fractional Brownian motion `B^H` observed on `[0, u]`, the
//! conditional law of `(B^H_t)_{t >= u}` is Gaussian with a path-dependent mean and a
//! deterministic covariance. This crate evaluates both through the Molchan–Volterra
//! kernel `k_H`, and ships an independent brute-force oracle (exact grid simulation and
//! finite-dimensional Schur-complement conditioning) to check every formula against.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! Module map:
//!
//! * [`numerics`]: special functions and endpoint-singular quadrature.
//! * [`linalg`]: small dense matrices, jittered Cholesky, symmetric eigenvalues.
//! * [`fbm`]: covariance, kernel `k_H`, the auxiliary integral `beta_H`, isometries.
//! * [`prediction`]: prediction weight `Psi_H`, conditional mean / covariance, sampling.
//! * [`asymptotics`]: small- and full-information expansions and power-law fits.
//! * [`oracle`]: Cholesky simulation, Volterra simulation, kriging, refinement studies.
#![no_std]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod fbm;
pub mod linalg;
pub mod numerics;
pub mod oracle;
pub mod prediction;

pub use error::{Error, Result};
pub use fbm::{fbm_cov, kernel_constants, kernel_k, Hurst, KernelConstants, VolterraKernel};
pub use linalg::Matrix;
pub use numerics::{integrate_weighted, Estimate, QuadratureSpec, Rule};
pub use prediction::{
    build_conditional_law, cond_cov, cond_mean, psi, sample_conditional_paths, ConditionalLaw,
    ObservedPath, PredictionModel,
};
