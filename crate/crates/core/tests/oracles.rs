//! Brute-force and Monte Carlo cross-checks.

use fbm_prediction_core::fbm::{fbm_cov, VolterraKernel};
use fbm_prediction_core::linalg::Matrix;
use fbm_prediction_core::numerics::{integrate_weighted, QuadratureSpec, Rule};
use fbm_prediction_core::oracle::{
    build_grid_gaussian, empirical_moments, observed_from_samples, sample_fbm, sample_fbm_volterra,
    schur_condition, Kriging, MCConfig, VolterraScheme,
};
use fbm_prediction_core::prediction::bracket_density;
use fbm_prediction_core::{
    build_conditional_law, cond_cov, cond_mean, psi, sample_conditional_paths, Hurst, ObservedPath,
};

fn hu(h: f64) -> Hurst {
    Hurst::new(h).unwrap()
}

fn uniform(n: usize, end: f64) -> Vec<f64> {
    (1..=n).map(|i| end * i as f64 / n as f64).collect()
}

/// Sample covariance entry standard error under Gaussianity.
fn cov_se(c: &Matrix, i: usize, j: usize, n: usize) -> f64 {
    ((c[(i, i)] * c[(j, j)] + c[(i, j)] * c[(i, j)]) / n as f64).sqrt()
}

#[test]
fn psi_against_graded_midpoint() {
    let (t, s, u, h) = (2.0, 0.3, 1.0, 0.75);
    let c: f64 = h - 0.5;
    // z = u + L x^4 grades toward z = u; 10^6 midpoint cells
    let n = 1_000_000;
    let len = t - u;
    let mut acc = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) / n as f64;
        let dz = 4.0 * len * x.powi(3) / n as f64;
        let z = u + len * x.powi(4);
        acc += dz * z.powf(c) * (z - u).powf(c) / (z - s);
    }
    let expect = -(std::f64::consts::PI * c).sin() / std::f64::consts::PI * s.powf(-c) * (u - s).powf(-c) * acc;
    let got = psi(t, s, u, hu(h)).unwrap();
    assert!(((got - expect) / expect).abs() < 1e-8, "{got} vs {expect}");
}

#[test]
fn exact_sampler_covariance_within_four_standard_errors() {
    let grid = [0.3, 0.7, 1.0, 1.8];
    let gg = build_grid_gaussian(&grid, hu(0.3)).unwrap();
    let n = 20_000;
    let x = sample_fbm(&gg, &MCConfig::new(n, 2024, false).unwrap()).unwrap();
    let (_, emp) = empirical_moments(&x);
    for i in 0..4 {
        for j in 0..=i {
            let se = cov_se(gg.cov(), i, j, n);
            assert!((emp[(i, j)] - gg.cov()[(i, j)]).abs() < 4.0 * se, "({i},{j})");
        }
    }
}

#[test]
fn brownian_increments_look_normal() {
    let n_steps = 64;
    let grid = uniform(n_steps, 1.0);
    let gg = build_grid_gaussian(&grid, hu(0.5)).unwrap();
    let x = sample_fbm(&gg, &MCConfig::new(200, 5, false).unwrap()).unwrap();
    let dt = 1.0 / n_steps as f64;
    let mut inc = Vec::new();
    for r in 0..x.rows() {
        let row = x.row(r);
        inc.push(row[0]);
        inc.extend(row.windows(2).map(|w| w[1] - w[0]));
    }
    let m = inc.len() as f64;
    let mean = inc.iter().sum::<f64>() / m;
    let var = inc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    let skew = inc.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / m / var.powf(1.5);
    let kurt = inc.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / m / (var * var);
    let jb = m / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    // chi-square(2) upper 0.001 quantile
    assert!(jb < 13.8155, "Jarque-Bera {jb}");
    assert!((var / dt - 1.0).abs() < 4.0 * (2.0 / m).sqrt());
}

#[test]
fn volterra_sampler_variance_at_one() {
    let x = sample_fbm_volterra(&[0.5, 1.0], hu(0.75), &MCConfig::new(10_000, 77, false).unwrap(), 1024).unwrap();
    let (_, emp) = empirical_moments(&x);
    assert!((emp[(1, 1)] - 1.0).abs() < 0.05, "{}", emp[(1, 1)]);
}

#[test]
fn volterra_brownian_is_exact() {
    let grid = [0.25, 0.5, 1.0];
    let cfg = MCConfig::new(3, 1, false).unwrap();
    let a = sample_fbm_volterra(&grid, hu(0.5), &cfg, 8).unwrap();
    let cov = VolterraScheme::new(&grid, hu(0.5), 8).unwrap().covariance();
    for i in 0..3 {
        for j in 0..3 {
            assert!((cov[(i, j)] - grid[i].min(grid[j])).abs() < 1e-15);
        }
    }
    assert_eq!(a.rows(), 3);
}

/// max |scheme covariance - r_H| on a small grid for increasing internal steps.
fn scheme_distances(h: f64, steps: &[usize]) -> Vec<f64> {
    let grid = [0.25, 0.5, 0.75, 1.0];
    steps
        .iter()
        .map(|&n| {
            let cov = VolterraScheme::new(&grid, hu(h), n).unwrap().covariance();
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    worst = worst.max((cov[(i, j)] - fbm_cov(grid[i], grid[j], hu(h)).unwrap()).abs());
                }
            }
            worst
        })
        .collect()
}

#[test]
fn volterra_scheme_converges_at_rate_two_minus_two_h() {
    // the midpoint rule misses the (t-s)^{2H-1} endpoint mass of k², which decays like
    // step^{2-2H}: halving per doubling only holds as H -> 1/2
    let steps = [128, 256, 512, 1024, 2048];
    for &h in &[0.6, 0.75, 0.9] {
        let d = scheme_distances(h, &steps);
        assert!(d.windows(2).all(|w| w[1] < w[0]), "H={h}: {d:?}");
        let rate = (d[3] / d[4]).log2();
        assert!((rate - (2.0 - 2.0 * h)).abs() < 0.1, "H={h}: rate {rate}");
    }
    let d = scheme_distances(0.3, &steps);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "H=0.3: {d:?}");
}

#[test]
fn grid_gaussian_256_is_psd() {
    let grid = uniform(256, 1.0);
    let gg = build_grid_gaussian(&grid, hu(0.3)).unwrap();
    let ev = gg.cov().symmetric_eigenvalues();
    assert!(ev[0] > -1e-10 * gg.cov().trace());
}

#[test]
fn schur_brownian_and_full_conditioning() {
    let gg = build_grid_gaussian(&[1.0, 1.7], hu(0.5)).unwrap();
    let (m, c) = schur_condition(&gg, &[0], &[0.4]).unwrap();
    assert!((m[1] - 0.4).abs() < 1e-15 && (c[(1, 1)] - 0.7).abs() < 1e-15);
}

#[test]
fn schur_variance_matches_cond_cov() {
    let mut grid = uniform(512, 1.0);
    grid.push(1.5);
    let gg = build_grid_gaussian(&grid, hu(0.7)).unwrap();
    let past: Vec<usize> = (0..512).collect();
    let k = Kriging::new(&gg, &past).unwrap();
    let analytic = cond_cov(1.5, 1.5, 1.0, hu(0.7)).unwrap();
    assert!(((k.cov[(0, 0)] - analytic) / analytic).abs() < 5e-3);

    let mut grid = uniform(1024, 0.5);
    grid.push(1.0);
    let gg = build_grid_gaussian(&grid, hu(0.75)).unwrap();
    let past: Vec<usize> = (0..1024).collect();
    let k = Kriging::new(&gg, &past).unwrap();
    let analytic = cond_cov(1.0, 1.0, 0.5, hu(0.75)).unwrap();
    assert!(((k.cov[(0, 0)] - analytic) / analytic).abs() < 5e-3);
}

#[test]
fn cond_mean_matches_kriging_on_sampled_path() {
    let h = hu(0.7);
    let mut grid = uniform(512, 1.0);
    grid.push(1.5);
    let gg = build_grid_gaussian(&grid, h).unwrap();
    let x = sample_fbm(&gg, &MCConfig::new(2, 8, false).unwrap()).unwrap();
    let past: Vec<usize> = (0..512).collect();
    let y = &x.row(0)[..512];
    let (m, _) = schur_condition(&gg, &past, y).unwrap();
    let path = observed_from_samples(&grid[..512], y).unwrap();
    let analytic = cond_mean(&path, 1.5, h).unwrap();
    assert!((analytic - m[512]).abs() < 5e-3, "{analytic} vs {}", m[512]);
}

fn some_path(h: Hurst, n: usize, seed: u64) -> ObservedPath {
    let grid = uniform(n, 1.0);
    let gg = build_grid_gaussian(&grid, h).unwrap();
    let x = sample_fbm(&gg, &MCConfig::new(2, seed, false).unwrap()).unwrap();
    observed_from_samples(&grid, x.row(0)).unwrap()
}

#[test]
fn conditional_sampler_reproduces_law_covariance() {
    let h = hu(0.25);
    let path = some_path(h, 64, 3);
    let grid: Vec<f64> = (0..32).map(|i| 1.0 + i as f64 / 31.0).collect();
    let law = build_conditional_law(&path, &grid, h).unwrap();
    let n = 20_000;
    let x = sample_conditional_paths(&law, n, 99).unwrap();
    let (_, emp) = empirical_moments(&x);
    let mut worst: f64 = 0.0;
    for i in 0..32 {
        for j in 0..=i {
            let se = cov_se(&law.cov, i, j, n);
            if se == 0.0 {
                assert!(emp[(i, j)].abs() < 1e-24);
                continue;
            }
            worst = worst.max((emp[(i, j)] - law.cov[(i, j)]).abs() / se);
        }
    }
    // 528 correlated entries: the maximum of |z| stays below ~4.5 with high probability
    assert!(worst < 4.5, "worst standardized deviation {worst}");
}

#[test]
fn conditional_sampler_mean_within_three_standard_errors() {
    let h = hu(0.75);
    let path = some_path(h, 64, 4);
    let grid: Vec<f64> = (1..=16).map(|i| 1.0 + i as f64 / 16.0).collect();
    let law = build_conditional_law(&path, &grid, h).unwrap();
    let n = 10_000;
    let x = sample_conditional_paths(&law, n, 123).unwrap();
    let (mean, _) = empirical_moments(&x);
    for i in 0..16 {
        let se = (law.cov[(i, i)] / n as f64).sqrt();
        assert!((mean[i] - law.mean[i]).abs() < 3.0 * se, "component {i}");
    }
}

#[test]
fn bracket_integrates_to_explained_variance() {
    for &h in &[0.3, 0.7] {
        let (t, u) = (1.5, 1.0);
        let spec = QuadratureSpec::new(Rule::DoubleExponential, 16, 0.0, 0.0, 1e-10).unwrap();
        let lhs = integrate_weighted(|v| bracket_density(t, v, hu(h)).unwrap_or(0.0), 0.0, u, &spec)
            .unwrap()
            .value;
        let rhs = t.powf(2.0 * h) - cond_cov(t, t, u, hu(h)).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-6, "H={h}: {lhs} vs {rhs}");
    }
}

#[test]
fn volterra_and_exact_samplers_agree_in_law() {
    let grid = [0.5, 1.0];
    let h = hu(0.6);
    let exact = build_grid_gaussian(&grid, h).unwrap();
    let coarse = VolterraScheme::new(&grid, h, 16).unwrap().covariance();
    let fine = VolterraScheme::new(&grid, h, 1024).unwrap().covariance();
    let dist = |m: &Matrix| {
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - exact.cov()[(i, j)]).abs())
            .fold(0.0, f64::max)
    };
    assert!(dist(&fine) < dist(&coarse));
    let k = VolterraKernel::new(h);
    assert!(k.eval(1.0, 0.5).unwrap() > 0.0);
}
