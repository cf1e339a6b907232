//! Special functions and quadrature for integrands with endpoint power-law singularities.

pub mod gauss;
pub mod quadrature;
pub mod special;
pub mod tanh_sinh;

pub use gauss::GaussRule;
pub use quadrature::{
    integrate_graded, integrate_weighted, integrate_with_gaps, Estimate, QuadratureSpec, Rule,
    DEFAULT_REL_TOL, SINGULAR_REL_TOL,
};
pub use special::{beta_fn, gauss_2f1, ln_gamma};
pub use tanh_sinh::Point;
