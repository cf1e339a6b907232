//! The invariant suites behind `verify`.

use fbm_prediction_core::asymptotics::{sweep, Regime};
use fbm_prediction_core::oracle::refinement_study;
use fbm_prediction_core::{
    fbm_cov, kernel_constants, Hurst, KernelConstants, ObservedPath, PredictionModel, VolterraKernel,
};

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::error::{Result, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::io::{fmt_num, Table};

pub const ISOMETRY_TOL: f64 = 1e-4;
pub const COV_TOL: f64 = 1e-4;
pub const TWO_FORM_TOL: f64 = 1e-4;
pub const ORACLE_TOL: f64 = 5e-3;
/// Allowed growth between successive meshes.
pub const MONOTONE_SLACK: f64 = 1.1;
pub const EXPONENT_TOL: f64 = 0.05;
pub const CONSTANT_TOL: f64 = 0.05;
const ROUNDOFF: f64 = 1e-12;

const DEFAULT_HURSTS: [f64; 3] = [0.25, 0.5, 0.75];
const LATTICE: [f64; 6] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
const MESHES: [usize; 4] = [64, 128, 256, 512];

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `observed <= tolerance`.
    fn at_most(name: String, observed: f64, tolerance: f64) -> Self {
        Self {
            name,
            observed,
            tolerance,
            pass: observed <= tolerance,
        }
    }
}

fn kernel_for(cfg: &RunConfig, h: Hurst) -> VolterraKernel {
    match cfg.corrupt_dh {
        Some(f) => {
            let KernelConstants { d, sigma } = kernel_constants(h);
            VolterraKernel::with_constants(h, KernelConstants { d: d * f, sigma })
        }
        None => VolterraKernel::new(h),
    }
}

fn isometry(cfg: &RunConfig, h: Hurst, out: &mut Vec<Check>) -> Result<()> {
    let kern = kernel_for(cfg, h);
    for t in [0.5, 1.0, 2.0] {
        let defect = kern.variance_defect(t, cfg.quad_tol)?.abs();
        out.push(Check::at_most(format!("isometry_h{}_t{t}", h.value()), defect, ISOMETRY_TOL));
    }
    Ok(())
}

fn covariance_reproduction(cfg: &RunConfig, h: Hurst, out: &mut Vec<Check>) -> Result<()> {
    let kern = kernel_for(cfg, h);
    let mut worst = 0.0f64;
    for &t in &LATTICE {
        for &s in LATTICE.iter().filter(|&&s| s <= t) {
            let v = kern.inner_product(t, s, 0.0, s, cfg.quad_tol)?.value;
            let r = fbm_cov(t, s, h)?;
            worst = worst.max(((v - r) / r).abs());
        }
    }
    out.push(Check::at_most(format!("cov_reproduction_h{}", h.value()), worst, COV_TOL));
    Ok(())
}

fn two_form(cfg: &RunConfig, h: Hurst, out: &mut Vec<Check>) -> Result<()> {
    let model = PredictionModel::from_kernel(kernel_for(cfg, h)).with_rel_tol(cfg.quad_tol)?;
    let mut worst = 0.0f64;
    for u in [0.2, 0.7, 1.0] {
        for s in [1.0f64, 1.3, 2.0] {
            for t in [1.0, 1.6, 2.5] {
                let rep = model.cond_cov_report(t, s, u)?;
                let r = fbm_cov(t, s, h)?;
                worst = worst.max((rep.value - rep.alternative).abs() / r.max(1.0));
            }
        }
    }
    out.push(Check::at_most(format!("two_form_h{}", h.value()), worst, TWO_FORM_TOL));
    Ok(())
}

/// Closed-form branch at `H = 1/2`: no tolerance at all.
fn brownian(h: Hurst, out: &mut Vec<Check>) -> Result<()> {
    let model = PredictionModel::new(h);
    let times: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
    let values: Vec<f64> = times.iter().map(|t| (7.0 * t).sin() * t).collect();
    let path = ObservedPath::new(times, values)?;
    let u = path.u();
    let mut mean_gap = 0.0f64;
    let mut cov_gap = 0.0f64;
    for t in [1.0, 1.25, 1.5, 2.0, 3.0] {
        mean_gap = mean_gap.max((model.cond_mean(&path, t)? - path.last_value()).abs());
        for s in [1.0, 1.1, 2.0, 2.5] {
            cov_gap = cov_gap.max((model.cond_cov(t, s, u)? - (t.min(s) - u)).abs());
        }
    }
    out.push(Check::at_most("brownian_mean".into(), mean_gap, 0.0));
    out.push(Check::at_most("brownian_cov".into(), cov_gap, 0.0));
    Ok(())
}

fn oracle_convergence(cfg: &RunConfig, h: Hurst, out: &mut Vec<Check>) -> Result<()> {
    let future: Vec<f64> = (1..=16).map(|j| 1.0 + j as f64 / 16.0).collect();
    let rows = refinement_study(h, 1.0, &future, &MESHES, cfg.seed)?;
    let last = rows.last().expect("meshes are non-empty");
    let hv = h.value();
    out.push(Check::at_most(format!("oracle_cov_h{hv}"), last.cov_max_rel, ORACLE_TOL));
    out.push(Check::at_most(format!("oracle_mean_h{hv}"), last.mean_rms, ORACLE_TOL));
    // ratio of successive discrepancies; round-off sized ones count as no growth
    let growth = |a: f64, b: f64| if b <= ROUNDOFF { 0.0 } else { b / a };
    let worst = rows
        .windows(2)
        .flat_map(|w| [growth(w[0].cov_max_rel, w[1].cov_max_rel), growth(w[0].mean_rms, w[1].mean_rms)])
        .fold(0.0f64, f64::max);
    out.push(Check::at_most(format!("oracle_monotone_h{hv}"), worst, MONOTONE_SLACK));
    Ok(())
}

fn asymptotic_fits(h: Hurst, out: &mut Vec<Check>) -> Result<()> {
    for regime in [Regime::no_info(h)?, Regime::FullInfoDiag, Regime::FullInfoOffDiag] {
        let rep = sweep(regime, h, 1e-3, 1e-2, 8)?;
        let name = format!("{}_h{}", regime.name(), h.value());
        out.push(Check::at_most(
            format!("{name}_exponent"),
            (rep.fitted_exponent - rep.target_exponent).abs(),
            EXPONENT_TOL,
        ));
        out.push(Check::at_most(
            format!("{name}_constant"),
            ((rep.extrapolated_constant - rep.target_constant) / rep.target_constant).abs(),
            CONSTANT_TOL,
        ));
    }
    Ok(())
}

/// Runs every suite for the configured Hurst index, or for 0.25, 0.5 and 0.75.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let hursts = match cfg.hurst {
        Some(h) => vec![h],
        None => DEFAULT_HURSTS.iter().map(|&h| Hurst::new(h)).collect::<std::result::Result<_, _>>()?,
    };
    let mut out = Vec::new();
    for h in hursts {
        isometry(cfg, h, &mut out)?;
        covariance_reproduction(cfg, h, &mut out)?;
        two_form(cfg, h, &mut out)?;
        oracle_convergence(cfg, h, &mut out)?;
        if h.is_near_half() {
            brownian(h, &mut out)?;
        } else {
            asymptotic_fits(h, &mut out)?;
        }
    }
    Ok(out)
}

pub fn report(checks: &[Check]) -> Table {
    let mut table = Table::new(&["name", "status", "observed", "tolerance"]);
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        table.push(vec![c.name.clone(), status.into(), fmt_num(c.observed), fmt_num(c.tolerance)]);
    }
    table
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let checks = run_checks(cfg)?;
    let warnings: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("FAILED {}: observed {} > tolerance {}", c.name, c.observed, c.tolerance))
        .collect();
    Ok(Outcome {
        code: if warnings.is_empty() { EXIT_OK } else { EXIT_VERIFY_FAILED },
        table: report(&checks),
        summary: None,
        warnings,
    })
}
