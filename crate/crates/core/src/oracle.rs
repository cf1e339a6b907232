//! Brute-force ground truth: exact grid simulation and finite-dimensional conditioning.
//!
//! Nothing here touches the kernel formulas of [`crate::prediction`] except
//! [`sample_fbm_volterra`], which is the Volterra representation run as a simulator.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fbm::{cov_unchecked, Hurst, VolterraKernel};
use crate::linalg::{Cholesky, Matrix};
use crate::prediction::{path_rng, ObservedPath, PredictionModel};

/// fBm covariance on a grid together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct GridGaussian {
    grid: Vec<f64>,
    hurst: Hurst,
    cov: Matrix,
    chol: Cholesky,
}

impl GridGaussian {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn chol(&self) -> &Cholesky {
        &self.chol
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid"));
    }
    if grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidGrid("grid times must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing"));
    }
    Ok(())
}

/// `r_H` on `grid × grid`, factored with the shared jitter policy.
pub fn build_grid_gaussian(grid: &[f64], h: Hurst) -> Result<GridGaussian> {
    check_grid(grid)?;
    let cov = Matrix::symmetric_from_fn(grid.len(), |i, j| cov_unchecked(grid[i], grid[j], h.value()));
    let chol = Cholesky::factor(&cov)?;
    Ok(GridGaussian {
        grid: grid.to_vec(),
        hurst: h,
        cov,
        chol,
    })
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MCConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl MCConfig {
    pub fn new(n_paths: usize, seed: u64, antithetic: bool) -> Result<Self> {
        let cfg = Self {
            n_paths,
            seed,
            antithetic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::Domain("n_paths must be at least 2"));
        }
        Ok(())
    }
}

/// Fills `z` with the normals of path `index`. Antithetic pairs share a stream.
fn normals(cfg: &MCConfig, index: usize, z: &mut [f64]) {
    let (stream, flip) = if cfg.antithetic {
        (index / 2, index % 2 == 1)
    } else {
        (index, false)
    };
    let mut rng = path_rng(cfg.seed, stream as u64);
    for zi in z.iter_mut() {
        let x: f64 = StandardNormal.sample(&mut rng);
        *zi = if flip { -x } else { x };
    }
}

/// Exact fBm paths on the grid, one per row.
pub fn sample_fbm(gg: &GridGaussian, cfg: &MCConfig) -> Result<Matrix> {
    cfg.validate()?;
    let n = gg.grid.len();
    let mut out = Matrix::zeros(cfg.n_paths, n);
    let mut z = vec![0.0; n];
    for p in 0..cfg.n_paths {
        normals(cfg, p, &mut z);
        gg.chol.mul_lower(&z, out.row_mut(p));
    }
    Ok(out)
}

/// Midpoint discretization of `B_t = ∫_0^t k(t, s) dW_s`.
#[derive(Debug, Clone)]
pub struct VolterraScheme {
    grid: Vec<f64>,
    /// `weights[j][i] = k(grid[j], s_i*) sqrt(Δ_i)` for cells left of `grid[j]`
    weights: Matrix,
}

impl VolterraScheme {
    /// `internal_steps` uniform cells on `[0, max(grid)]`, refined so that every output
    /// time is a cell boundary.
    pub fn new(grid: &[f64], h: Hurst, internal_steps: usize) -> Result<Self> {
        check_grid(grid)?;
        if internal_steps == 0 {
            return Err(Error::Domain("internal_steps must be positive"));
        }
        let end = *grid.last().expect("non-empty grid");
        let mut knots: Vec<f64> = (0..=internal_steps)
            .map(|i| end * i as f64 / internal_steps as f64)
            .chain(grid.iter().copied())
            .collect();
        knots.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        knots.dedup();
        let kernel = VolterraKernel::new(h);
        let cells = knots.len() - 1;
        let weights = Matrix::from_fn(grid.len(), cells, |j, i| {
            let (a, b) = (knots[i], knots[i + 1]);
            if b > grid[j] {
                return 0.0;
            }
            let mid = 0.5 * (a + b);
            kernel.eval_gap(grid[j], mid, grid[j] - mid) * (b - a).sqrt()
        });
        Ok(Self {
            grid: grid.to_vec(),
            weights,
        })
    }

    pub fn cells(&self) -> usize {
        self.weights.cols()
    }

    /// Covariance of the discretized process, exactly (no sampling).
    pub fn covariance(&self) -> Matrix {
        let n = self.grid.len();
        Matrix::symmetric_from_fn(n, |i, j| {
            self.weights
                .row(i)
                .iter()
                .zip(self.weights.row(j))
                .map(|(a, b)| a * b)
                .sum()
        })
    }

    pub fn sample(&self, cfg: &MCConfig) -> Result<Matrix> {
        cfg.validate()?;
        let mut out = Matrix::zeros(cfg.n_paths, self.grid.len());
        let mut z = vec![0.0; self.cells()];
        for p in 0..cfg.n_paths {
            normals(cfg, p, &mut z);
            let y = self.weights.mul_vec(&z);
            out.row_mut(p).copy_from_slice(&y);
        }
        Ok(out)
    }
}

/// fBm paths from the Volterra representation driven by simulated Brownian increments.
pub fn sample_fbm_volterra(grid: &[f64], h: Hurst, cfg: &MCConfig, internal_steps: usize) -> Result<Matrix> {
    VolterraScheme::new(grid, h, internal_steps)?.sample(cfg)
}

/// Conditioning of the grid Gaussian on the values at `past`.
///
/// `weights` maps past values to the conditional mean at the future indices.
#[derive(Debug, Clone)]
pub struct Kriging {
    pub past: Vec<usize>,
    pub future: Vec<usize>,
    /// `Σ_fp Σ_pp^{-1}`, one row per future index
    pub weights: Matrix,
    /// `Σ_ff - Σ_fp Σ_pp^{-1} Σ_pf`
    pub cov: Matrix,
    chol_pp: Cholesky,
}

impl Kriging {
    pub fn new(gg: &GridGaussian, past: &[usize]) -> Result<Self> {
        let n = gg.grid.len();
        if past.is_empty() {
            return Err(Error::Domain("past_indices must be non-empty"));
        }
        let mut is_past = vec![false; n];
        for &i in past {
            if i >= n || is_past[i] {
                return Err(Error::Domain("past indices must be distinct and in range"));
            }
            is_past[i] = true;
        }
        let future: Vec<usize> = (0..n).filter(|&i| !is_past[i]).collect();
        let c = &gg.cov;
        let sigma_pp = Matrix::symmetric_from_fn(past.len(), |a, b| c[(past[a], past[b])]);
        let chol_pp = Cholesky::factor(&sigma_pp)?;
        let nf = future.len();
        // rows of V = L^{-1} Σ_pf, stored per future index
        let mut v = Matrix::zeros(nf, past.len());
        let mut weights = Matrix::zeros(nf, past.len());
        for (f, &fi) in future.iter().enumerate() {
            let row = v.row_mut(f);
            for (a, &pi) in past.iter().enumerate() {
                row[a] = c[(fi, pi)];
            }
            chol_pp.solve_lower_in_place(row);
            let w = weights.row_mut(f);
            w.copy_from_slice(v.row(f));
            chol_pp.solve_upper_in_place(w);
        }
        let cov = Matrix::symmetric_from_fn(nf, |a, b| {
            let dot: f64 = v.row(a).iter().zip(v.row(b)).map(|(x, y)| x * y).sum();
            c[(future[a], future[b])] - dot
        });
        Ok(Self {
            past: past.to_vec(),
            future,
            weights,
            cov,
            chol_pp,
        })
    }

    /// Conditional mean at the future indices.
    pub fn mean(&self, past_values: &[f64]) -> Result<Vec<f64>> {
        if past_values.len() != self.past.len() {
            return Err(Error::Domain("one past value per past index"));
        }
        Ok(self.weights.mul_vec(past_values))
    }

    pub fn chol_pp(&self) -> &Cholesky {
        &self.chol_pp
    }
}

/// Conditional mean and covariance over the whole grid.
///
/// Past indices carry their observed value and zero (co)variance; future indices carry
/// the Schur-complement moments.
pub fn schur_condition(gg: &GridGaussian, past: &[usize], past_values: &[f64]) -> Result<(Vec<f64>, Matrix)> {
    let k = Kriging::new(gg, past)?;
    let fm = k.mean(past_values)?;
    let n = gg.grid.len();
    let mut mean = vec![0.0; n];
    for (&i, &y) in past.iter().zip(past_values) {
        mean[i] = y;
    }
    for (&i, &m) in k.future.iter().zip(&fm) {
        mean[i] = m;
    }
    let mut cov = Matrix::zeros(n, n);
    for (a, &i) in k.future.iter().enumerate() {
        for (b, &j) in k.future.iter().enumerate() {
            cov[(i, j)] = k.cov[(a, b)];
        }
    }
    Ok((mean, cov))
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRow {
    /// observation cells on `[0, u]`
    pub cells: usize,
    /// `max_t sqrt(dᵀ Σ_pp d)`: RMS of the mean discrepancy under the fBm law
    pub mean_rms: f64,
    /// mean discrepancy for one fixed sampled path, max over the future grid
    pub mean_sample: f64,
    /// `max |Σ_schur - r̂| / r̂` over the future grid
    pub cov_max_rel: f64,
}

/// Analytic law against Schur conditioning on uniform observation grids of `[0, u]`.
///
/// The mean discrepancy is a linear functional `dᵀy` of the observations; its size is
/// reported as the standard deviation under the fBm law (deterministic) and for one
/// path drawn with `seed`.
pub fn refinement_study(
    h: Hurst,
    u: f64,
    future: &[f64],
    meshes: &[usize],
    seed: u64,
) -> Result<Vec<RefinementRow>> {
    if meshes.is_empty() || meshes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("mesh cell counts must be increasing"));
    }
    if future.iter().any(|&t| !(t > u)) || future.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("future grid must be increasing and beyond u"));
    }
    let model = PredictionModel::new(h);
    let nf = future.len();
    let analytic = Matrix::symmetric_from_fn(nf, |i, j| {
        model.cond_cov(future[i], future[j], u).unwrap_or(f64::NAN)
    });
    if analytic.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("conditional covariance quadrature failed"));
    }
    let mut rows = Vec::with_capacity(meshes.len());
    for &n in meshes {
        if n == 0 {
            return Err(Error::InvalidGrid("mesh needs at least one cell"));
        }
        let times: Vec<f64> = (0..=n).map(|i| u * i as f64 / n as f64).collect();
        let grid: Vec<f64> = times[1..].iter().chain(future).copied().collect();
        let gg = build_grid_gaussian(&grid, h)?;
        let past: Vec<usize> = (0..n).collect();
        let krig = Kriging::new(&gg, &past)?;

        let mut cov_max_rel: f64 = 0.0;
        for i in 0..nf {
            for j in 0..=i {
                let a = analytic[(i, j)];
                let d = (krig.cov[(i, j)] - a).abs();
                cov_max_rel = cov_max_rel.max(if a == 0.0 { d } else { d / a.abs() });
            }
        }

        let cfg = MCConfig::new(2, seed, false)?;
        let sample = sample_fbm(&gg, &cfg)?;
        let y = &sample.row(0)[..n];
        let mut mean_rms: f64 = 0.0;
        let mut mean_sample: f64 = 0.0;
        let mut coef = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        for (f, &t) in future.iter().enumerate() {
            let w = model.mean_weights(&times, t)?;
            // m = y_n - Σ w_i (y_{i+1} - y_i), with y_0 = 0, as coefficients on y_1..y_n
            coef.iter_mut().for_each(|c| *c = 0.0);
            coef[n - 1] = 1.0;
            for (i, wi) in w.iter().enumerate() {
                coef[i] -= wi;
                if i > 0 {
                    coef[i - 1] += wi;
                }
            }
            for (c, k) in coef.iter_mut().zip(krig.weights.row(f)) {
                *c -= k;
            }
            // sqrt(dᵀ L Lᵀ d) = |Lᵀ d|
            let l = krig.chol_pp().lower();
            for (j, t_j) in tmp.iter_mut().enumerate() {
                *t_j = (j..n).map(|i| l[(i, j)] * coef[i]).sum();
            }
            let rms = tmp.iter().map(|x| x * x).sum::<f64>().sqrt();
            mean_rms = mean_rms.max(rms);
            let on_path: f64 = coef.iter().zip(y).map(|(c, v)| c * v).sum();
            mean_sample = mean_sample.max(on_path.abs());
        }
        rows.push(RefinementRow {
            cells: n,
            mean_rms,
            mean_sample,
            cov_max_rel,
        });
    }
    Ok(rows)
}

/// Builds the observed path `(0, 0), (t_i, y_i)` from a sampled grid row.
pub fn observed_from_samples(times: &[f64], values: &[f64]) -> Result<ObservedPath> {
    let t: Vec<f64> = core::iter::once(0.0).chain(times.iter().copied()).collect();
    let v: Vec<f64> = core::iter::once(0.0).chain(values.iter().copied()).collect();
    ObservedPath::new(t, v)
}

/// Sample mean and (n-1)-normalized covariance of the rows.
pub fn empirical_moments(samples: &Matrix) -> (Vec<f64>, Matrix) {
    let (n, d) = (samples.rows(), samples.cols());
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, x) in mean.iter_mut().zip(samples.row(r)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(d, d);
    for r in 0..n {
        let row = samples.row(r);
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n as f64 - 1.0).max(1.0);
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    (mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu(h: f64) -> Hurst {
        Hurst::new(h).unwrap()
    }

    #[test]
    fn grid_gaussian_small_cases() {
        let gg = build_grid_gaussian(&[1.0], hu(0.3)).unwrap();
        assert_eq!(gg.cov()[(0, 0)], 1.0);
        let gg = build_grid_gaussian(&[0.4, 1.3], hu(0.5)).unwrap();
        assert_eq!(gg.cov().as_slice(), &[0.4, 0.4, 0.4, 1.3]);
        assert!(build_grid_gaussian(&[0.0, 1.0], hu(0.5)).is_err());
        assert!(build_grid_gaussian(&[1.0, 1.0], hu(0.5)).is_err());
    }

    #[test]
    fn reconstruction_of_256_grid() {
        let grid: Vec<f64> = (1..=256).map(|i| i as f64 / 256.0).collect();
        let gg = build_grid_gaussian(&grid, hu(0.3)).unwrap();
        let tr = gg.cov().trace();
        assert!(gg.chol().reconstruction_error(gg.cov()) < 1e-10 * tr);
    }

    #[test]
    fn antithetic_pairs() {
        let gg = build_grid_gaussian(&[0.5, 1.0, 1.5], hu(0.7)).unwrap();
        let cfg = MCConfig::new(6, 11, true).unwrap();
        let x = sample_fbm(&gg, &cfg).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                assert_eq!(x.row(2 * k + 1)[j], -x.row(2 * k)[j]);
            }
        }
        assert!(MCConfig::new(1, 0, false).is_err());
    }

    #[test]
    fn volterra_brownian_is_partial_sum() {
        let grid = [0.25, 0.5, 1.0];
        let scheme = VolterraScheme::new(&grid, hu(0.5), 4).unwrap();
        let cov = scheme.covariance();
        for i in 0..3 {
            for j in 0..3 {
                assert!((cov[(i, j)] - grid[i].min(grid[j])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn schur_trivial_cases() {
        let gg = build_grid_gaussian(&[1.0, 2.0], hu(0.5)).unwrap();
        let (m, c) = schur_condition(&gg, &[0], &[0.7]).unwrap();
        assert!((m[1] - 0.7).abs() < 1e-14);
        assert!((c[(1, 1)] - 1.0).abs() < 1e-14);
        let (m, c) = schur_condition(&gg, &[0, 1], &[0.7, -0.2]).unwrap();
        assert_eq!(m, vec![0.7, -0.2]);
        assert!(c.as_slice().iter().all(|&v| v == 0.0));
        assert!(schur_condition(&gg, &[], &[]).is_err());
        assert!(schur_condition(&gg, &[0, 0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn refinement_brownian_exact() {
        let rows = refinement_study(hu(0.5), 1.0, &[1.5, 2.0], &[4, 8], 3).unwrap();
        for r in rows {
            assert!(r.cov_max_rel < 1e-12 && r.mean_rms < 1e-12, "{r:?}");
        }
    }
}
