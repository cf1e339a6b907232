//! The conditional law of `(B^H_t)_{t >= u}` given `(B^H_v)_{v <= u}`.
//!
//! ```text
//! m̂_t(u)      = B_u - ∫_0^u Ψ_H(t, s | u) dB_s,
//! r̂_H(t,s|u)  = ∫_u^{t∧s} k_H(t, v) k_H(s, v) dv,
//! Ψ_H(t,s|u)  = -(sin(π(H-1/2))/π) s^{1/2-H} (u-s)^{1/2-H} ∫_u^t z^{H-1/2}(z-u)^{H-1/2} / (z-s) dz.
//! ```
//!
//! Paths are only ever observed on a grid. The default mean rule integrates `Ψ` over
//! each observation cell, which is the exact mean for the piecewise linear interpolant
//! of the observations.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fbm::{cov_unchecked, Hurst, VolterraKernel, KERNEL_REL_TOL};
use crate::linalg::{Cholesky, Matrix};
use crate::numerics::{integrate_graded, integrate_with_gaps, GaussRule};

/// `|H - 1/2|` above which the midpoint rule grades the cell next to `u`.
pub const GRADING_THRESHOLD: f64 = 0.05;
/// Number of geometric sub-cells (ratio 1/2) used by the graded midpoint rule.
pub const GRADED_CELLS: usize = 16;

/// Relative tolerance on the agreement of the two conditional covariance forms.
pub const TWO_FORM_TOL: f64 = 1e-4;

/// A path observed on `0 = t_0 < t_1 < ... < t_n = u` with `B_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ObservedPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidPath("times and values differ in length"));
        }
        if times.len() < 2 {
            return Err(Error::InvalidPath("need at least two observations"));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::InvalidPath("path must start at time 0 with value 0"));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidPath("non-finite entry"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath("times must be strictly increasing"));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Last observation time.
    pub fn u(&self) -> f64 {
        *self.times.last().expect("at least two points")
    }

    /// Last observed value `B_u`.
    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("at least two points")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Gaussian law of the future path on `grid`.
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    pub u: f64,
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub cov: Matrix,
    factor: Cholesky,
}

impl ConditionalLaw {
    /// Symmetrizes `cov`, then checks it is PSD by factoring it with the jitter policy.
    pub fn new(u: f64, grid: Vec<f64>, mean: Vec<f64>, mut cov: Matrix) -> Result<Self> {
        check_future_grid(u, &grid)?;
        if mean.len() != grid.len() || cov.rows() != grid.len() || cov.cols() != grid.len() {
            return Err(Error::InvalidGrid("mean and covariance must match the grid"));
        }
        cov.symmetrize();
        let factor = Cholesky::factor(&cov)?;
        Ok(Self {
            u,
            grid,
            mean,
            cov,
            factor,
        })
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    /// Pointwise standard deviations `sqrt(diag cov)`.
    pub fn std_dev(&self) -> Vec<f64> {
        self.cov.diagonal().into_iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

fn check_future_grid(u: f64, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty future grid"));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidGrid("conditioning time must be positive"));
    }
    if grid.iter().any(|&t| !(t >= u && t.is_finite())) {
        return Err(Error::InvalidGrid("future grid points must be finite and >= u"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("future grid must be strictly increasing"));
    }
    Ok(())
}

/// How `∫_0^u Ψ(t, s | u) dB_s` is discretized on the observation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanRule {
    /// `Ψ` averaged over each observation cell: exact for the linear interpolant.
    #[default]
    CellAverage,
    /// `Ψ` at cell midpoints; the cell touching `u` is split into geometric sub-cells
    /// when `|H - 1/2| > 0.05`.
    Midpoint,
}

/// Both forms of the conditional covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondCovReport {
    /// `∫_u^{t∧s} k k dv`
    pub value: f64,
    /// `r_H(t, s) - ∫_0^u k k dv`
    pub alternative: f64,
    /// `|value - alternative| <= 1e-4 max(1, r_H(t, s))`
    pub consistent: bool,
}

/// Prediction formulas for one Hurst index.
#[derive(Debug, Clone)]
pub struct PredictionModel {
    kernel: VolterraKernel,
    rule: MeanRule,
    rel_tol: f64,
    jacobi: GaussRule,
    legendre: GaussRule,
    cell: GaussRule,
}

impl PredictionModel {
    pub fn new(h: Hurst) -> Self {
        Self::from_kernel(VolterraKernel::new(h))
    }

    pub fn from_kernel(kernel: VolterraKernel) -> Self {
        let c = kernel.hurst().offset();
        Self {
            kernel,
            rule: MeanRule::default(),
            rel_tol: KERNEL_REL_TOL,
            jacobi: GaussRule::jacobi(16, c, 0.0).expect("H - 1/2 > -1"),
            legendre: GaussRule::legendre(16),
            cell: GaussRule::legendre(8),
        }
    }

    pub fn with_mean_rule(mut self, rule: MeanRule) -> Self {
        self.rule = rule;
        self
    }

    /// Tolerance for the kernel-product integrals in the covariance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidSpec("rel_tol must lie in (0, 1)"));
        }
        self.rel_tol = rel_tol;
        Ok(self)
    }

    pub fn hurst(&self) -> Hurst {
        self.kernel.hurst()
    }

    pub fn kernel(&self) -> &VolterraKernel {
        &self.kernel
    }

    pub fn mean_rule(&self) -> MeanRule {
        self.rule
    }

    /// `Ψ_H(t, s | u)` for `0 < s < u <= t`.
    pub fn psi(&self, t: f64, s: f64, u: f64) -> Result<f64> {
        if !(s > 0.0 && s < u && u <= t && t.is_finite()) {
            return Err(Error::Domain("psi requires 0 < s < u <= t"));
        }
        Ok(self.psi_gap(t, s, u, u - s))
    }

    /// `Ψ` with `eps = u - s` supplied exactly.
    fn psi_gap(&self, t: f64, s: f64, u: f64, eps: f64) -> f64 {
        let len = t - u;
        if len <= 0.0 || self.hurst().is_near_half() {
            return 0.0;
        }
        let c = self.hurst().offset();
        // z = u + eps y turns (u-s)^{1/2-H} ∫ into ∫_0^{len/eps} (u + eps y)^{H-1/2} y^{H-1/2} / (1 + y) dy
        let eps = eps.max(1e-300);
        let j = integrate_graded(
            |y, _| (u + eps * y).powf(c) / (1.0 + y),
            0.0,
            len / eps,
            1.0,
            &self.jacobi,
            &self.legendre,
        );
        -(PI * c).sin() / PI * s.powf(-c) * j
    }

    /// Per-cell weights `w_i` with `m̂_t = B_u - Σ w_i (B_{t_{i+1}} - B_{t_i})`.
    pub fn mean_weights(&self, times: &[f64], t: f64) -> Result<Vec<f64>> {
        let u = *times.last().ok_or(Error::InvalidPath("empty observation grid"))?;
        if !(t >= u && t.is_finite()) {
            return Err(Error::Domain("prediction time must satisfy t >= u"));
        }
        let cells = times.len().saturating_sub(1);
        if t == u || self.hurst().is_near_half() {
            return Ok(vec![0.0; cells]);
        }
        let mut out = Vec::with_capacity(cells);
        for i in 0..cells {
            let (a, b) = (times[i], times[i + 1]);
            let w = match self.rule {
                MeanRule::CellAverage => self.cell_average(t, u, a, b, i == 0 || i + 1 == cells)?,
                MeanRule::Midpoint => self.cell_midpoint(t, u, a, b, i + 1 == cells),
            };
            out.push(w);
        }
        Ok(out)
    }

    fn cell_average(&self, t: f64, u: f64, a: f64, b: f64, end_cell: bool) -> Result<f64> {
        let width = b - a;
        let total = if end_cell {
            // Ψ is singular at s = 0 (H > 1/2) and at s = u; the double exponential rule
            // receives both distances exactly
            let gap_to_u = u - b;
            integrate_with_gaps(
                |p| {
                    let s = if a == 0.0 { p.from_a } else { p.x };
                    self.psi_gap(t, s, u, gap_to_u + p.to_b)
                },
                a,
                b,
                1e-9,
            )?
            .value
        } else {
            self.cell.integrate(a, b, |s| self.psi_gap(t, s, u, u - s))
        };
        Ok(total / width)
    }

    fn cell_midpoint(&self, t: f64, u: f64, a: f64, b: f64, last: bool) -> f64 {
        let graded = last && (self.hurst().offset()).abs() > GRADING_THRESHOLD;
        if !graded {
            let s = 0.5 * (a + b);
            return self.psi_gap(t, s, u, u - s);
        }
        let width = b - a;
        let mut acc = 0.0;
        let mut hi_gap = width;
        for k in 0..GRADED_CELLS {
            let lo_gap = if k + 1 == GRADED_CELLS { 0.0 } else { 0.5 * hi_gap };
            let eps = 0.5 * (lo_gap + hi_gap);
            acc += (hi_gap - lo_gap) * self.psi_gap(t, u - eps, u, eps);
            hi_gap = lo_gap;
        }
        acc / width
    }

    /// `m̂_t(u)` for the observed path.
    pub fn cond_mean(&self, path: &ObservedPath, t: f64) -> Result<f64> {
        let weights = self.mean_weights(path.times(), t)?;
        Ok(apply_weights(path, &weights))
    }

    /// `r̂_H(t, s | u) = ∫_u^{t∧s} k(t,v) k(s,v) dv`.
    pub fn cond_cov(&self, t: f64, s: f64, u: f64) -> Result<f64> {
        check_cov_args(t, s, u)?;
        let m = t.min(s);
        if m == u {
            return Ok(0.0);
        }
        if self.hurst().is_near_half() {
            return Ok(m - u);
        }
        Ok(self.kernel.inner_product(t, s, u, m, self.rel_tol)?.value)
    }

    /// Both covariance forms and whether they agree.
    pub fn cond_cov_report(&self, t: f64, s: f64, u: f64) -> Result<CondCovReport> {
        let value = self.cond_cov(t, s, u)?;
        let r = cov_unchecked(t, s, self.hurst().value());
        let past = if self.hurst().is_near_half() {
            u
        } else {
            self.kernel.inner_product(t, s, 0.0, u, self.rel_tol)?.value
        };
        let alternative = r - past;
        Ok(CondCovReport {
            value,
            alternative,
            consistent: (value - alternative).abs() <= TWO_FORM_TOL * r.max(1.0),
        })
    }

    /// Mean and covariance on `grid`, validated as a Gaussian law.
    pub fn build_law(&self, path: &ObservedPath, grid: &[f64]) -> Result<ConditionalLaw> {
        let u = path.u();
        check_future_grid(u, grid)?;
        let mean = grid
            .iter()
            .map(|&t| self.cond_mean(path, t))
            .collect::<Result<Vec<_>>>()?;
        let n = grid.len();
        let mut cov = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.cond_cov(grid[i], grid[j], u)?;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        ConditionalLaw::new(u, grid.to_vec(), mean, cov)
    }

    /// `k_H(t, u)²`, the density of the bracket of `u ↦ m̂_t(u)`.
    pub fn bracket_density(&self, t: f64, u: f64) -> Result<f64> {
        let k = self.kernel.eval(t, u)?;
        Ok(k * k)
    }
}

fn check_cov_args(t: f64, s: f64, u: f64) -> Result<()> {
    if !(u > 0.0 && u <= t.min(s) && t.is_finite() && s.is_finite()) {
        return Err(Error::Domain("cond_cov requires 0 < u <= min(t, s)"));
    }
    Ok(())
}

/// `B_u - Σ w_i ΔB_i`.
pub fn apply_weights(path: &ObservedPath, weights: &[f64]) -> f64 {
    let v = path.values();
    let correction: f64 = weights
        .iter()
        .zip(v.windows(2))
        .map(|(w, pair)| w * (pair[1] - pair[0]))
        .sum();
    path.last_value() - correction
}

/// Draws `n_paths` rows of `mean + L z`.
///
/// Path `i` uses its own ChaCha8 stream `(seed, i)`, so any subset of rows can be
/// regenerated independently and the output does not depend on evaluation order.
pub fn sample_conditional_paths(law: &ConditionalLaw, n_paths: usize, seed: u64) -> Result<Matrix> {
    if n_paths == 0 {
        return Err(Error::Domain("n_paths must be positive"));
    }
    let n = law.grid.len();
    let mut out = Matrix::zeros(n_paths, n);
    let mut z = vec![0.0; n];
    let mut lz = vec![0.0; n];
    for p in 0..n_paths {
        let mut rng = path_rng(seed, p as u64);
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        law.factor.mul_lower(&z, &mut lz);
        for (dst, (m, x)) in out.row_mut(p).iter_mut().zip(law.mean.iter().zip(&lz)) {
            *dst = m + x;
        }
    }
    Ok(out)
}

pub(crate) fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `Ψ_H(t, s | u)`.
pub fn psi(t: f64, s: f64, u: f64, h: Hurst) -> Result<f64> {
    PredictionModel::new(h).psi(t, s, u)
}

/// `m̂^H_t(u)` with the default (cell-average) rule.
pub fn cond_mean(path: &ObservedPath, t: f64, h: Hurst) -> Result<f64> {
    PredictionModel::new(h).cond_mean(path, t)
}

/// `r̂_H(t, s | u)`.
pub fn cond_cov(t: f64, s: f64, u: f64, h: Hurst) -> Result<f64> {
    PredictionModel::new(h).cond_cov(t, s, u)
}

pub fn build_conditional_law(path: &ObservedPath, grid: &[f64], h: Hurst) -> Result<ConditionalLaw> {
    PredictionModel::new(h).build_law(path, grid)
}

/// `k_H(t, u)²`.
pub fn bracket_density(t: f64, u: f64, h: Hurst) -> Result<f64> {
    PredictionModel::new(h).bracket_density(t, u)
}
