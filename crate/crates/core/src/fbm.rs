//! Fractional Brownian motion: covariance, the Volterra kernel `k_H` and isometries.
//!
//! `B^H_t = ∫_0^t k_H(t, s) dW_s` with
//!
//! ```text
//! k_H(t, s) = d_H [ (t/s)^{H-1/2} (t-s)^{H-1/2} - (H-1/2) s^{H-1/2} β_H(t/s) ],
//! β_H(τ)    = ∫_1^τ w^{H-3/2} (w-1)^{H-1/2} dw.
//! ```
//!
//! `β_H` is evaluated in two branches. For `τ <= 2` a Gauss–Jacobi rule absorbs the
//! `(w-1)^{H-1/2}` end. For `τ > 2` the substitution `x = 1/w` gives
//!
//! ```text
//! β_H(τ) = (A_H - τ^{2H-1}) / (1 - 2H) - ∫_0^{1/τ} x^{-2H} [(1-x)^{H-1/2} - 1] dx,
//! A_H    = Γ(2-2H) Γ(H+1/2) / Γ(3/2-H),
//! ```
//!
//! where the remaining integrand is `x^{1-2H}` times a function analytic on `[0, 1/2]`.
//! Both branches run a fixed 16-node rule, which is accurate to rounding there.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::{
    gauss_2f1, integrate_with_gaps, ln_gamma, Estimate, GaussRule, QuadratureSpec,
};

/// `|H - 1/2|` below which every kernel quantity takes its Brownian value.
pub const NEAR_HALF_TOL: f64 = 1e-6;

/// Tolerance used for kernel-product integrals unless a caller asks otherwise.
pub const KERNEL_REL_TOL: f64 = 1e-10;

const BETA_NODES: usize = 16;

/// Validated Hurst index `H ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hurst {
    h: f64,
    near_half: bool,
}

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidHurst(h));
        }
        Ok(Self {
            h,
            near_half: (h - 0.5).abs() < NEAR_HALF_TOL,
        })
    }

    pub fn value(self) -> f64 {
        self.h
    }

    /// True when `|H - 1/2| < 1e-6`; the Brownian closed forms are used then.
    pub fn is_near_half(self) -> bool {
        self.near_half
    }

    /// `H - 1/2`, the kernel exponent.
    pub fn offset(self) -> f64 {
        self.h - 0.5
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

/// `d_H` (kernel normalization) and `σ_H` (operator normalization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub d: f64,
    pub sigma: f64,
}

/// `r_H(t, s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_cov(t: f64, s: f64, h: Hurst) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain("fbm_cov requires non-negative times"));
    }
    Ok(cov_unchecked(t, s, h.value()))
}

pub(crate) fn cov_unchecked(t: f64, s: f64, h: f64) -> f64 {
    if (h - 0.5).abs() < NEAR_HALF_TOL {
        return t.min(s);
    }
    if t == s {
        return t.powf(2.0 * h);
    }
    let e = 2.0 * h;
    0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
}

pub fn kernel_constants(h: Hurst) -> KernelConstants {
    if h.is_near_half() {
        return KernelConstants { d: 1.0, sigma: 1.0 };
    }
    let x = h.value();
    let lg = |v: f64| ln_gamma(v).expect("Gamma arguments are positive for H in (0, 1)");
    let d = (0.5 * ((2.0 * x).ln() + lg(1.5 - x) - lg(x + 0.5) - lg(2.0 - 2.0 * x))).exp();
    let c = h.offset();
    let pc = core::f64::consts::PI * c;
    let sigma = (pc * 2.0 * x / (lg(2.0 - 2.0 * x).exp() * pc.sin())).sqrt();
    KernelConstants { d, sigma }
}

/// `β_H(τ) = ∫_1^τ w^{H-3/2}(w-1)^{H-1/2} dw`; `τ = ∞` is allowed.
///
/// Returns `+∞` for `τ = ∞` when `H >= 1/2`, where the integral diverges.
pub fn beta_h(tau: f64, h: Hurst) -> Result<f64> {
    if !(tau >= 1.0) {
        return Err(Error::Domain("beta_h requires tau >= 1"));
    }
    Ok(VolterraKernel::new(h).beta(tau, tau - 1.0))
}

/// `k_H(t, s)` for `0 < s < t`.
pub fn kernel_k(t: f64, s: f64, h: Hurst) -> Result<f64> {
    VolterraKernel::new(h).eval(t, s)
}

/// The hypergeometric form `(t-s)^{H-1/2} F(1/2-H, H-1/2; H+1/2; (s-t)/s)`.
///
/// This equals `k_H(t, s)` up to a multiplicative constant (numerically `d_H`). Only
/// defined for `H > 1/2`, where the Euler integral applies.
pub fn kernel_k_hypergeom(t: f64, s: f64, h: Hurst) -> Result<f64> {
    if !(s > 0.0 && s < t && t.is_finite()) {
        return Err(Error::Domain("kernel_k_hypergeom requires 0 < s < t"));
    }
    if !(h.value() > 0.5) || h.is_near_half() {
        return Err(Error::Domain("kernel_k_hypergeom requires H > 1/2"));
    }
    let c = h.offset();
    let f = gauss_2f1(-c, c, h.value() + 0.5, (s - t) / s)?;
    Ok((t - s).powf(c) * f)
}

/// `∫_0^t [k(t,v) - k(s,v)]² dv - |t-s|^{2H}`, zero by the Volterra isometry.
///
/// `quad.rel_tol` sets the tolerance; kernel products are always integrated with the
/// endpoint-aware double exponential rule since their endpoint exponents are mixed.
pub fn isometry_gap(t: f64, s: f64, h: Hurst, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    VolterraKernel::new(h).isometry_gap(t, s, quad.rel_tol)
}

/// The kernel `k_H` with its constants and quadrature rules prepared once.
#[derive(Debug, Clone)]
pub struct VolterraKernel {
    hurst: Hurst,
    constants: KernelConstants,
    /// `ln A_H`
    ln_a: f64,
    near: GaussRule,
    far: GaussRule,
}

impl VolterraKernel {
    pub fn new(h: Hurst) -> Self {
        Self::with_constants(h, kernel_constants(h))
    }

    /// Kernel with caller-supplied constants. Used to plant a wrong `d_H` in negative
    /// controls; everything else should call [`VolterraKernel::new`].
    pub fn with_constants(h: Hurst, constants: KernelConstants) -> Self {
        let x = h.value();
        let lg = |v: f64| ln_gamma(v).expect("Gamma arguments are positive for H in (0, 1)");
        let ln_a = lg(2.0 - 2.0 * x) + lg(x + 0.5) - lg(1.5 - x);
        let near = GaussRule::jacobi(BETA_NODES, h.offset(), 0.0).expect("H - 1/2 > -1");
        let far = GaussRule::jacobi(BETA_NODES, 1.0 - 2.0 * x, 0.0).expect("1 - 2H > -1");
        Self {
            hurst: h,
            constants,
            ln_a,
            near,
            far,
        }
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn constants(&self) -> KernelConstants {
        self.constants
    }

    /// `β_H(τ)` with `τ - 1` supplied separately so that `τ → 1⁺` keeps full precision.
    pub fn beta(&self, tau: f64, tau_minus_one: f64) -> f64 {
        if tau_minus_one <= 0.0 {
            return 0.0;
        }
        if self.hurst.is_near_half() {
            return tau_minus_one.ln_1p();
        }
        let h = self.hurst.value();
        let c = self.hurst.offset();
        if tau <= 2.0 {
            let half = 0.5 * tau_minus_one;
            let sum: f64 = self
                .near
                .nodes()
                .iter()
                .zip(self.near.weights())
                .map(|(&xi, &w)| w * (1.0 + half * (1.0 + xi)).powf(h - 1.5))
                .sum();
            return half.powf(h + 0.5) * sum;
        }
        if tau.is_infinite() {
            return if h < 0.5 {
                self.ln_a.exp() / (1.0 - 2.0 * h)
            } else {
                f64::INFINITY
            };
        }
        let lead = (self.ln_a.exp_m1() - ((2.0 * h - 1.0) * tau.ln()).exp_m1()) / (1.0 - 2.0 * h);
        let eps = 1.0 / tau;
        let half = 0.5 * eps;
        let sum: f64 = self
            .far
            .nodes()
            .iter()
            .zip(self.far.weights())
            .map(|(&xi, &w)| {
                let x = half * (1.0 + xi);
                w * (c * (-x).ln_1p()).exp_m1() / x
            })
            .sum();
        lead - half.powf(2.0 - 2.0 * h) * sum
    }

    /// `β_H(∞)`, finite only for `H < 1/2`.
    pub fn beta_infinite(&self) -> Option<f64> {
        let v = self.beta(f64::INFINITY, f64::INFINITY);
        v.is_finite().then_some(v)
    }

    /// `k_H(t, s)`, checked: requires `0 < s < t`.
    pub fn eval(&self, t: f64, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < t && t.is_finite()) {
            return Err(Error::Domain("kernel_k requires 0 < s < t"));
        }
        Ok(self.eval_gap(t, s, t - s))
    }

    /// `k_H(t, s)` with `gap = t - s` supplied exactly. No domain checks.
    pub fn eval_gap(&self, t: f64, s: f64, gap: f64) -> f64 {
        if self.hurst.is_near_half() {
            return 1.0;
        }
        let c = self.hurst.offset();
        let first = (c * (t.ln() - s.ln() + gap.ln())).exp();
        let second = c * s.powf(c) * self.beta(t / s, gap / s);
        self.constants.d * (first - second)
    }

    /// `∫_lo^hi k(t,v) k(s,v) dv` for `0 <= lo <= hi <= min(t, s)`.
    pub fn inner_product(&self, t: f64, s: f64, lo: f64, hi: f64, rel_tol: f64) -> Result<Estimate> {
        if !(lo >= 0.0 && lo <= hi && hi <= t.min(s)) {
            return Err(Error::Domain("inner product needs 0 <= lo <= hi <= min(t, s)"));
        }
        if lo == hi {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        if self.hurst.is_near_half() {
            return Ok(Estimate {
                value: hi - lo,
                error: 0.0,
            });
        }
        let (gt, gs) = (t - hi, s - hi);
        integrate_with_gaps(
            |p| {
                let v = if lo == 0.0 { p.from_a } else { p.x };
                let kt = self.eval_gap(t, v, gt + p.to_b);
                if t == s {
                    kt * kt
                } else {
                    kt * self.eval_gap(s, v, gs + p.to_b)
                }
            },
            lo,
            hi,
            rel_tol,
        )
    }

    /// `∫_0^hi [k(t,v) - k(s,v)]² dv` for `hi <= min(t, s)`.
    pub fn squared_difference(&self, t: f64, s: f64, hi: f64, rel_tol: f64) -> Result<Estimate> {
        if !(hi >= 0.0 && hi <= t.min(s)) {
            return Err(Error::Domain("squared difference needs 0 <= hi <= min(t, s)"));
        }
        if hi == 0.0 || t == s || self.hurst.is_near_half() {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        let (gt, gs) = (t - hi, s - hi);
        integrate_with_gaps(
            |p| {
                let v = p.from_a;
                let diff = self.eval_gap(t, v, gt + p.to_b) - self.eval_gap(s, v, gs + p.to_b);
                diff * diff
            },
            0.0,
            hi,
            rel_tol,
        )
    }

    /// `∫_0^t k(t,v)² dv / t^{2H} - 1`.
    pub fn variance_defect(&self, t: f64, rel_tol: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain("variance isometry needs t > 0"));
        }
        let v = self.inner_product(t, t, 0.0, t, rel_tol)?.value;
        Ok(v / t.powf(2.0 * self.hurst.value()) - 1.0)
    }

    /// See [`isometry_gap`].
    pub fn isometry_gap(&self, t: f64, s: f64, rel_tol: f64) -> Result<f64> {
        if !(s > 0.0 && s <= t && t.is_finite()) {
            return Err(Error::Domain("isometry_gap requires 0 < s <= t"));
        }
        if s == t || self.hurst.is_near_half() {
            return Ok(0.0);
        }
        let below = self.squared_difference(t, s, s, rel_tol)?.value;
        let above = self.inner_product(t, t, s, t, rel_tol)?.value;
        Ok(below + above - (t - s).powf(2.0 * self.hurst.value()))
    }
}
