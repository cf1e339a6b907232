//! Small- and full-information expansions of the conditional covariance.
//!
//! No information (`u → 0`):
//!
//! * `H < 1/2`: `r_H(t,s) - r̂_H(t,s|u) ~ C_H u^{2H}`, `C_H = (d²/2H)(H-1/2)² β_H(∞)²`;
//! * `H > 1/2`: `r_H(t,s) - r̂_H(t,s|u) ~ d² (ts)^{2H-1} u^{2-2H} / (8-8H)`.
//!
//! Full information (`u → s`):
//!
//! * `r̂_H(s,s|u) ~ (d²/2H)(s-u)^{2H}`;
//! * `r̂_H(t,s|u) ~ C_{H,t,s} (s-u)^{H+1/2}` for `t > s`.
//!
//! The remark following the no-information result swaps the long/short-range labels;
//! the exponents here follow the statement and proof of the result itself.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fbm::{cov_unchecked, kernel_constants, Hurst, VolterraKernel, KERNEL_REL_TOL};
use crate::numerics::integrate_with_gaps;
use crate::prediction::PredictionModel;

/// Minimum coefficient of determination for an accepted power-law fit.
pub const MIN_R_SQUARED: f64 = 0.99;

/// Which expansion a sweep probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `u → 0`, `H < 1/2`, `t = s = 1`
    NoInfoSmallH,
    /// `u → 0`, `H > 1/2`, `t = s = 1`
    NoInfoLargeH,
    /// `u → 1`, `t = s = 1`
    FullInfoDiag,
    /// `u → 1`, `t = 2`, `s = 1`
    FullInfoOffDiag,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::NoInfoSmallH => "no-info-smallH",
            Regime::NoInfoLargeH => "no-info-largeH",
            Regime::FullInfoDiag => "full-info-diag",
            Regime::FullInfoOffDiag => "full-info-offdiag",
        }
    }

    /// The no-information regime matching `h`.
    pub fn no_info(h: Hurst) -> Result<Self> {
        if h.is_near_half() {
            Err(Error::Regime("no-information expansions need H != 1/2"))
        } else if h.value() < 0.5 {
            Ok(Regime::NoInfoSmallH)
        } else {
            Ok(Regime::NoInfoLargeH)
        }
    }

    fn check(self, h: Hurst) -> Result<()> {
        let ok = match self {
            Regime::NoInfoSmallH => h.value() < 0.5 && !h.is_near_half(),
            Regime::NoInfoLargeH => h.value() > 0.5 && !h.is_near_half(),
            Regime::FullInfoDiag | Regime::FullInfoOffDiag => !h.is_near_half(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Regime("Hurst index outside the regime"))
        }
    }

    /// Principal exponent.
    pub fn exponent(self, h: Hurst) -> f64 {
        let x = h.value();
        match self {
            Regime::NoInfoSmallH | Regime::FullInfoDiag => 2.0 * x,
            Regime::NoInfoLargeH => 2.0 - 2.0 * x,
            Regime::FullInfoOffDiag => x + 0.5,
        }
    }

    /// Exponent of the first correction relative to the principal term.
    pub fn correction_exponent(self, h: Hurst) -> f64 {
        match self {
            Regime::NoInfoSmallH | Regime::NoInfoLargeH => (2.0 * h.value() - 1.0).abs(),
            Regime::FullInfoDiag | Regime::FullInfoOffDiag => 1.0,
        }
    }

    /// Principal constant.
    pub fn constant(self, h: Hurst) -> Result<f64> {
        match self {
            Regime::NoInfoSmallH => c_no_info_small(h),
            Regime::NoInfoLargeH => c_no_info_large(h, 1.0, 1.0),
            Regime::FullInfoDiag => Ok(full_info_diag_constant(h)),
            Regime::FullInfoOffDiag => c_full_info(h, 2.0, 1.0),
        }
    }
}

/// `C_H = (d_H²/2H)(H-1/2)² β_H(∞)²`, `H < 1/2`.
pub fn c_no_info_small(h: Hurst) -> Result<f64> {
    Regime::NoInfoSmallH.check(h)?;
    let kern = VolterraKernel::new(h);
    let b = kern
        .beta_infinite()
        .ok_or(Error::Regime("beta_H(inf) diverges for H >= 1/2"))?;
    let d = kern.constants().d;
    let c = h.offset();
    Ok(d * d / (2.0 * h.value()) * c * c * b * b)
}

/// `C_{H,t,s} = d_H² (ts)^{2H-1} / (8-8H)`, `H > 1/2`.
pub fn c_no_info_large(h: Hurst, t: f64, s: f64) -> Result<f64> {
    Regime::NoInfoLargeH.check(h)?;
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::Domain("t and s must be positive"));
    }
    let d = kernel_constants(h).d;
    let x = h.value();
    Ok(d * d * (t * s).powf(2.0 * x - 1.0) / (8.0 - 8.0 * x))
}

/// `C_{H,t,s} = d²/(H+1/2) [(t/s)^{H-1/2}(t-s)^{H-1/2} + (1/2-H) s^{H-1/2} β_H(t/s)]`.
///
/// The bracket is `k_H(t, s) / d_H`.
pub fn c_full_info(h: Hurst, t: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && t > s && t.is_finite()) {
        return Err(Error::Regime("off-diagonal constant needs t > s > 0"));
    }
    if h.is_near_half() {
        return Ok(1.0);
    }
    let kern = VolterraKernel::new(h);
    let d = kern.constants().d;
    Ok(d * kern.eval(t, s)? / (h.value() + 0.5))
}

/// `d_H² / 2H`; 1 for Brownian motion.
pub fn full_info_diag_constant(h: Hurst) -> f64 {
    let d = kernel_constants(h).d;
    d * d / (2.0 * h.value())
}

fn check_unit(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain("u must lie in (0, 1)"));
    }
    Ok(())
}

/// `r_H(1,1) - r̂_H(1,1|u) = ∫_0^u k(1,v)² dv`, integrated directly.
pub fn explained_variance(u: f64, h: Hurst) -> Result<f64> {
    check_unit(u)?;
    if h.is_near_half() {
        return Ok(u);
    }
    Ok(VolterraKernel::new(h).inner_product(1.0, 1.0, 0.0, u, KERNEL_REL_TOL)?.value)
}

/// `g(u)`, normalized to tend to 1 in both no-information regimes.
///
/// For `H > 1/2` this is `(8-8H)/d² (1 - r̂(1,1|u)) / u^{2-2H}`; for `H < 1/2` it is
/// `(1 - r̂(1,1|u)) / (C_H u^{2H})`.
pub fn g_diagnostic(u: f64, h: Hurst) -> Result<f64> {
    check_unit(u)?;
    let regime = Regime::no_info(h)?;
    let c = regime.constant(h)?;
    Ok(explained_variance(u, h)? / (c * u.powf(regime.exponent(h))))
}

/// `f(u) = (2H/d²) r̂(1,1|u) / (1-u)^{2H}`.
pub fn f_diagnostic(u: f64, h: Hurst) -> Result<f64> {
    check_unit(u)?;
    if h.is_near_half() {
        return Ok(1.0);
    }
    let r = PredictionModel::new(h).cond_cov(1.0, 1.0, u)?;
    Ok(r / (full_info_diag_constant(h) * (1.0 - u).powf(2.0 * h.value())))
}

/// Least-squares fit of `log y = exponent log x + log constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::FitFailure("need at least four matching points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::FitFailure("values must be positive and finite"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = least_squares_line(&lx, &ly)?;
    let mean_y = ly.iter().sum::<f64>() / ly.len() as f64;
    let ss_tot: f64 = ly.iter().map(|v| (v - mean_y).powi(2)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    if !(r_squared >= MIN_R_SQUARED) {
        return Err(Error::FitFailure("coefficient of determination below 0.99"));
    }
    Ok(PowerFit {
        exponent: slope,
        constant: intercept.exp(),
        r_squared,
    })
}

fn least_squares_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::FitFailure("abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Constant `C` of `y ≈ C x^p (1 + c' x^q)`, from a linear fit of `y/x^p` against `x^q`.
pub fn richardson_constant(x: &[f64], y: &[f64], p: f64, q: f64) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::FitFailure("need at least two matching points"));
    }
    let xs: Vec<f64> = x.iter().map(|v| v.powf(q)).collect();
    let rho: Vec<f64> = x.iter().zip(y).map(|(a, b)| b / a.powf(p)).collect();
    let (_, intercept) = least_squares_line(&xs, &rho)?;
    Ok(intercept)
}

/// `n` geometric points from `hi` down to `lo`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::Domain("geometric grid needs 0 < lo < hi and n >= 2"));
    }
    let r = (lo / hi).powf(1.0 / (n - 1) as f64);
    Ok((0..n)
        .map(|i| if i + 1 == n { lo } else { hi * r.powi(i as i32) })
        .collect())
}

/// A sweep toward the limit point of one regime.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub regime: Regime,
    /// conditioning times, ordered toward the limit point (0 or 1)
    pub u_grid: Vec<f64>,
    /// distance of each `u` to the limit point
    pub distance: Vec<f64>,
    /// `r - r̂` (no information) or `r̂` (full information)
    pub residual: Vec<f64>,
    /// `residual / (target_constant distance^target_exponent)`: `g`, `f` or the off-diagonal analogue
    pub diagnostic: Vec<f64>,
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
    /// constant with the first correction term removed
    pub extrapolated_constant: f64,
    pub r_squared: f64,
    pub target_exponent: f64,
    pub target_constant: f64,
}

/// Sweeps the distance to the limit point geometrically over `[lo, hi]` with `n` points.
pub fn sweep(regime: Regime, h: Hurst, lo: f64, hi: f64, n: usize) -> Result<AsymptoticReport> {
    regime.check(h)?;
    if !(hi < 1.0) {
        return Err(Error::Domain("sweep distances must stay below 1"));
    }
    let distance = geometric_grid(lo, hi, n)?;
    let kern = VolterraKernel::new(h);
    let mut residual = Vec::with_capacity(n);
    let mut u_grid = Vec::with_capacity(n);
    for &delta in &distance {
        let (u, r) = match regime {
            Regime::NoInfoSmallH | Regime::NoInfoLargeH => {
                (delta, kern.inner_product(1.0, 1.0, 0.0, delta, KERNEL_REL_TOL)?.value)
            }
            Regime::FullInfoDiag => {
                let u = 1.0 - delta;
                (u, kern.inner_product(1.0, 1.0, u, 1.0, KERNEL_REL_TOL)?.value)
            }
            Regime::FullInfoOffDiag => {
                let u = 1.0 - delta;
                (u, kern.inner_product(2.0, 1.0, u, 1.0, KERNEL_REL_TOL)?.value)
            }
        };
        u_grid.push(u);
        residual.push(r);
    }
    let target_exponent = regime.exponent(h);
    let target_constant = regime.constant(h)?;
    let diagnostic = distance
        .iter()
        .zip(&residual)
        .map(|(d, r)| r / (target_constant * d.powf(target_exponent)))
        .collect();
    let fit = fit_power_law(&distance, &residual)?;
    let extrapolated_constant = richardson_constant(
        &distance,
        &residual,
        target_exponent,
        regime.correction_exponent(h),
    )?;
    Ok(AsymptoticReport {
        regime,
        u_grid,
        distance,
        residual,
        diagnostic,
        fitted_exponent: fit.exponent,
        fitted_constant: fit.constant,
        extrapolated_constant,
        r_squared: fit.r_squared,
        target_exponent,
        target_constant,
    })
}

/// The four integrals whose sum gives `r - r̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// `∫_0^u I_i dv`
    pub terms: [f64; 4],
    /// `-d² Σ terms`
    pub total: f64,
    /// `r̂(t,s|u) - r(t,s)` from the conditional covariance
    pub target: f64,
}

impl Decomposition {
    pub fn relative_error(&self) -> f64 {
        ((self.total - self.target) / self.target).abs()
    }
}

/// Evaluates `-d² ∫_0^u (I_1 + I_2 + I_3 + I_4) dv` term by term, for `0 < u < s <= t`.
pub fn decomposition(t: f64, s: f64, u: f64, h: Hurst) -> Result<Decomposition> {
    if !(u > 0.0 && u < s && s <= t && t.is_finite()) {
        return Err(Error::Domain("decomposition needs 0 < u < s <= t"));
    }
    if h.is_near_half() {
        return Err(Error::Regime("the decomposition degenerates at H = 1/2"));
    }
    let kern = VolterraKernel::new(h);
    let c = h.offset();
    let (gt, gs) = (t - u, s - u);
    let term = |which: usize| -> Result<f64> {
        Ok(integrate_with_gaps(
            |p| {
                let v = p.from_a;
                let (dt, ds) = (gt + p.to_b, gs + p.to_b);
                let bt = || kern.beta(t / v, dt / v);
                let bs = || kern.beta(s / v, ds / v);
                match which {
                    0 => (c * ((t / v).ln() + (s / v).ln() + dt.ln() + ds.ln())).exp(),
                    1 => -c * t.powf(c) * dt.powf(c) * bs(),
                    2 => -c * s.powf(c) * ds.powf(c) * bt(),
                    _ => c * c * v.powf(2.0 * c) * bs() * bt(),
                }
            },
            0.0,
            u,
            KERNEL_REL_TOL,
        )?
        .value)
    };
    let terms = [term(0)?, term(1)?, term(2)?, term(3)?];
    let d = kern.constants().d;
    let total = -d * d * terms.iter().sum::<f64>();
    let cond = PredictionModel::from_kernel(kern).cond_cov(t, s, u)?;
    let target = cond - cov_unchecked(t, s, h.value());
    Ok(Decomposition {
        terms,
        total,
        target,
    })
}
