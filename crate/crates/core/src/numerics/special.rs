#[allow(unused_imports)]
use num_traits::Float;

use super::quadrature::{integrate_weighted, QuadratureSpec, Rule};
use crate::error::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("ln_gamma requires a finite positive argument"));
    }
    Ok(libm::lgamma_r(x).0)
}

/// The Beta function `Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain("beta_fn requires positive arguments"));
    }
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// Gauss hypergeometric `F(a, b; c; x)` through its Euler integral
///
/// `F = ∫_0^1 t^{b-1} (1-t)^{c-b-1} (1 - x t)^{-a} dt / B(b, c - b)`,
///
/// valid for `c > b > 0` and `x < 1`. Nothing outside that domain is attempted.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && x.is_finite()) {
        return Err(Error::UnsupportedDomain("non-finite 2F1 parameter"));
    }
    if !(c > b && b > 0.0) {
        return Err(Error::UnsupportedDomain("Euler integral needs c > b > 0"));
    }
    if !(x < 1.0) {
        return Err(Error::UnsupportedDomain("Euler integral needs x < 1"));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    let spec = QuadratureSpec::new(Rule::AdaptiveSubdivision, 24, b - 1.0, c - b - 1.0, 1e-13)?;
    let integral = integrate_weighted(|t| (-a * (-x * t).ln_1p()).exp(), 0.0, 1.0, &spec)?;
    Ok(integral.value / beta_fn(b, c - b)?)
}
