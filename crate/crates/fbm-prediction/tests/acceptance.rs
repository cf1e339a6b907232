//! End-to-end acceptance gate. One PASS/FAIL line per item; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fbm_prediction::config::{Command, GridSpec, RunConfig, Settings};
use fbm_prediction::{cmd_predict, io::Table};
use fbm_prediction_core::asymptotics::{decomposition, f_diagnostic, sweep, Regime};
use fbm_prediction_core::fbm::KERNEL_REL_TOL;
use fbm_prediction_core::oracle::{build_grid_gaussian, refinement_study, sample_fbm, MCConfig};
use fbm_prediction_core::prediction::apply_weights;
use fbm_prediction_core::{
    build_conditional_law, fbm_cov, kernel_constants, sample_conditional_paths, Hurst, ObservedPath,
    PredictionModel, VolterraKernel,
};

const HURSTS: [f64; 6] = [0.1, 0.25, 0.4, 0.6, 0.75, 0.9];
const LATTICE: [f64; 6] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];

fn hu(h: f64) -> Hurst {
    Hurst::new(h).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn isometry() -> Outcome {
    let mut worst = 0.0f64;
    for &h in &HURSTS {
        let kern = VolterraKernel::new(hu(h));
        for t in [0.5, 1.0, 2.0] {
            worst = worst.max(kern.variance_defect(t, KERNEL_REL_TOL).unwrap().abs());
        }
    }
    verdict(worst < 1e-4, format!("max relative defect {worst:.3e} (< 1e-4)"))
}

fn covariance_reproduction() -> Outcome {
    let mut worst = 0.0f64;
    for &h in &HURSTS {
        let kern = VolterraKernel::new(hu(h));
        for &t in &LATTICE {
            for &s in &LATTICE {
                let (hi, lo) = (t.max(s), t.min(s));
                let v = kern.inner_product(hi, lo, 0.0, lo, KERNEL_REL_TOL).unwrap().value;
                let r = fbm_cov(t, s, hu(h)).unwrap();
                worst = worst.max(((v - r) / r).abs());
            }
        }
    }
    verdict(worst < 1e-4, format!("max relative error {worst:.3e} over 6x6 lattices (< 1e-4)"))
}

fn brownian_exactness() -> Outcome {
    let model = PredictionModel::new(hu(0.5));
    let mut mismatches = 0;
    for seed in 0..3u32 {
        let times: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0 * (1.0 + seed as f64)).collect();
        let values: Vec<f64> = times.iter().map(|t| ((3 + seed) as f64 * t).cos() - 1.0).collect();
        let path = ObservedPath::new(times, values).unwrap();
        let u = path.u();
        for dt in [0.0, 0.1, 0.5, 1.0, 2.5] {
            let t = u + dt;
            if model.cond_mean(&path, t).unwrap() != path.last_value() {
                mismatches += 1;
            }
            for ds in [0.0, 0.3, 1.7] {
                let s = u + ds;
                if model.cond_cov(t, s, u).unwrap() != t.min(s) - u {
                    mismatches += 1;
                }
            }
        }
    }
    verdict(mismatches == 0, format!("{mismatches} inexact values (zero tolerance)"))
}

fn oracle_agreement() -> Outcome {
    let future: Vec<f64> = (1..=16).map(|j| 1.0 + j as f64 / 16.0).collect();
    let meshes = [64, 128, 256, 512];
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [0.25, 0.75] {
        let rows = refinement_study(hu(h), 1.0, &future, &meshes, 7).unwrap();
        let last = rows.last().unwrap();
        let monotone = rows.windows(2).all(|w| {
            w[1].cov_max_rel <= 1.1 * w[0].cov_max_rel && w[1].mean_rms <= 1.1 * w[0].mean_rms
        });
        pass &= last.cov_max_rel < 5e-3 && last.mean_rms < 5e-3 && monotone;
        parts.push(format!(
            "H={h}: cov {:.2e}, mean {:.2e}, decreasing={monotone}",
            last.cov_max_rel, last.mean_rms
        ));
    }
    verdict(pass, format!("{} (both < 5e-3 at 512 cells)", parts.join("; ")))
}

fn monotone_and_convexity() -> Outcome {
    let us: Vec<f64> = (1..=100).map(|i| i as f64 / 101.0).collect();
    let curve = |h: f64| -> Vec<f64> {
        let m = PredictionModel::new(hu(h));
        us.iter().map(|&u| m.cond_cov(1.0, 1.0, u).unwrap()).collect()
    };
    let second = |v: &[f64]| -> Vec<f64> { v.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect() };
    let (low, high) = (curve(0.25), curve(0.75));
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let d_low = second(&low);
    let d_high = second(&high);
    let min_high = d_high.iter().copied().fold(f64::INFINITY, f64::min);
    let non_convex = d_low.iter().any(|&d| d < 0.0) && d_low.iter().any(|&d| d > 0.0);
    let pass = dec(&low) && dec(&high) && min_high >= -1e-8 && non_convex;
    verdict(
        pass,
        format!(
            "decreasing H=0.25 {} H=0.75 {}; min second difference H=0.75 {min_high:.2e}; H=0.25 changes sign {non_convex}",
            dec(&low),
            dec(&high)
        ),
    )
}

fn fit_line(rep: &fbm_prediction_core::asymptotics::AsymptoticReport) -> (bool, String) {
    let exp_err = (rep.fitted_exponent - rep.target_exponent).abs();
    let c_err = ((rep.extrapolated_constant - rep.target_constant) / rep.target_constant).abs();
    let plain = ((rep.fitted_constant - rep.target_constant) / rep.target_constant).abs();
    (
        exp_err <= 0.05 && c_err <= 0.05,
        format!(
            "{}: exponent {:.4} vs {:.4}, constant error {:.2e} (plain fit {:.2e})",
            rep.regime.name(),
            rep.fitted_exponent,
            rep.target_exponent,
            c_err,
            plain
        ),
    )
}

fn no_info_fits() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [0.25, 0.75] {
        let rep = sweep(Regime::no_info(hu(h)).unwrap(), hu(h), 1e-3, 1e-2, 8).unwrap();
        let (ok, line) = fit_line(&rep);
        pass &= ok;
        parts.push(format!("H={h} {line}"));
    }
    verdict(pass, parts.join("; "))
}

fn full_info_fits() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [0.25, 0.75] {
        for regime in [Regime::FullInfoDiag, Regime::FullInfoOffDiag] {
            let rep = sweep(regime, hu(h), 1e-3, 1e-2, 8).unwrap();
            let (ok, line) = fit_line(&rep);
            pass &= ok;
            parts.push(format!("H={h} {line}"));
        }
        let f = f_diagnostic(0.99, hu(h)).unwrap();
        pass &= (0.9..=1.1).contains(&f);
        parts.push(format!("H={h} f(0.99)={f:.4}"));
    }
    verdict(pass, parts.join("; "))
}

fn bracket_variance() -> Outcome {
    let n_obs = 1024;
    let n_paths = 10_000;
    let times: Vec<f64> = (1..=n_obs).map(|i| i as f64 / n_obs as f64).collect();
    let with_zero: Vec<f64> = std::iter::once(0.0).chain(times.iter().copied()).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, seed) in [(0.3, 11u64), (0.7, 12u64)] {
        let model = PredictionModel::new(hu(h));
        let weights = model.mean_weights(&with_zero, 1.5).unwrap();
        let gg = build_grid_gaussian(&times, hu(h)).unwrap();
        let samples = sample_fbm(&gg, &MCConfig::new(n_paths, seed, false).unwrap()).unwrap();
        let means: Vec<f64> = (0..n_paths)
            .map(|p| {
                let values: Vec<f64> = std::iter::once(0.0).chain(samples.row(p).iter().copied()).collect();
                apply_weights(&ObservedPath::new(with_zero.clone(), values).unwrap(), &weights)
            })
            .collect();
        let n = n_paths as f64;
        let avg = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (n - 1.0);
        let target = 1.5f64.powf(2.0 * h) - model.cond_cov(1.5, 1.5, 1.0).unwrap();
        let se = target * (2.0 / (n - 1.0)).sqrt();
        let z = (var - target) / se;
        pass &= z.abs() <= 3.0;
        parts.push(format!("H={h}: var {var:.5} target {target:.5} z={z:.2}"));
    }
    verdict(pass, format!("{} (|z| <= 3)", parts.join("; ")))
}

fn holder_bounds() -> Outcome {
    let mut upper_ok = true;
    let mut lower_ok = true;
    for h in [0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
        let kern = VolterraKernel::new(hu(h));
        let d = kernel_constants(hu(h)).d;
        for u in [0.5, 1.0, 2.0] {
            for ds in [0.0, 0.2, 1.0] {
                for dt in [1e-3, 0.1, 0.5, 1.0] {
                    let (s, t) = (u + ds, u + ds + dt);
                    let v = kern.squared_difference(t, s, u, KERNEL_REL_TOL).unwrap().value;
                    upper_ok &= v <= (t - s).powf(2.0 * h) * (1.0 + 1e-4);
                }
            }
            for frac in [1e-4, 1e-3, 1e-2] {
                let t = u * (1.0 + frac);
                let v = kern.squared_difference(t, u, u, KERNEL_REL_TOL).unwrap().value;
                lower_ok &= v >= (1.0 - d * d / (2.0 * h)) * 0.95 * (t - u).powf(2.0 * h);
            }
        }
    }
    // 0.05, 0.10, ..., 0.90 without 0.5
    let sweep: Vec<f64> = (1..=18).filter(|&k| k != 10).map(|k| k as f64 * 0.05).collect();
    let worst = sweep
        .iter()
        .map(|&h| kernel_constants(hu(h)).d.powi(2) / (2.0 * h))
        .fold(0.0f64, f64::max);
    verdict(
        upper_ok && lower_ok && worst < 1.0 && sweep.len() == 17,
        format!("upper {upper_ok}, lower {lower_ok}, max d^2/2H over 17 values {worst:.4}"),
    )
}

fn decomposition_check() -> Outcome {
    let mut worst = 0.0f64;
    for h in [0.25, 0.75] {
        worst = worst.max(decomposition(2.0, 1.0, 0.5, hu(h)).unwrap().relative_error());
    }
    verdict(worst < 1e-4, format!("max relative error {worst:.3e} (< 1e-4)"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("path.csv");
    let h = hu(0.7);
    let times: Vec<f64> = (1..=64).map(|i| i as f64 / 64.0).collect();
    let gg = build_grid_gaussian(&times, h).unwrap();
    let sample = sample_fbm(&gg, &MCConfig::new(2, 5, false).unwrap()).unwrap();
    let mut table = Table::new(&["time", "value"]);
    table.push_nums(&[0.0, 0.0]);
    for (t, x) in times.iter().zip(sample.row(0)) {
        table.push_nums(&[*t, *x]);
    }
    std::fs::write(&input, table.to_bytes()).unwrap();
    let cfg = RunConfig::resolve(
        Command::Predict,
        Settings {
            hurst: Some(0.7),
            input: Some(input),
            grid: Some(GridSpec::new(1.0, 2.0, 9).unwrap()),
            ..Settings::default()
        },
    )
    .unwrap();
    let a = cmd_predict(&cfg).unwrap().to_bytes();
    let b = cmd_predict(&cfg).unwrap().to_bytes();

    let path = fbm_prediction_core::oracle::observed_from_samples(&times, sample.row(0)).unwrap();
    let grid = GridSpec::new(1.0, 2.0, 9).unwrap().linear();
    let law = build_conditional_law(&path, &grid, h).unwrap();
    let x = sample_conditional_paths(&law, 50, 42).unwrap();
    let y = sample_conditional_paths(&law, 50, 42).unwrap();
    let same_samples = x.as_slice().iter().zip(y.as_slice()).all(|(p, q)| p.to_bits() == q.to_bits());
    verdict(
        a == b && same_samples,
        format!("predict bytes equal {}, sampled paths bit-equal {same_samples}", a == b),
    )
}

fn main() -> ExitCode {
    let items: [(&str, fn() -> Outcome); 11] = [
        ("isometry", isometry),
        ("covariance reproduction", covariance_reproduction),
        ("brownian exactness", brownian_exactness),
        ("oracle agreement", oracle_agreement),
        ("monotonicity and convexity", monotone_and_convexity),
        ("no-information fits", no_info_fits),
        ("full-information fits", full_info_fits),
        ("bracket variance", bracket_variance),
        ("increment bounds", holder_bounds),
        ("decomposition", decomposition_check),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in items.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let status = if out.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!out.pass);
        println!(
            "[{:02}] {status} {name}: {} ({:.1}s)",
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", items.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
