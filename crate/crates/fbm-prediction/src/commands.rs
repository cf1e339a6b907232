//! One function per subcommand. Each returns the CSV it would write.

use fbm_prediction_core::asymptotics::{self, c_full_info, f_diagnostic, g_diagnostic, Regime};
use fbm_prediction_core::oracle::{build_grid_gaussian, sample_fbm, MCConfig};
use fbm_prediction_core::{fbm_cov, kernel_k, sample_conditional_paths, Hurst, PredictionModel};

use crate::config::{Command, GridSpec, RunConfig, SweepKind};
use crate::error::{CliError, Result, EXIT_OK};
use crate::io::{fmt_num, read_path_file, Table};
use crate::verify::cmd_verify;

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub table: Table,
    /// Fit summary rows written next to a sweep.
    pub summary: Option<Table>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Self {
            code: EXIT_OK,
            table,
            summary: None,
            warnings: Vec::new(),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Kernel => cmd_kernel(cfg),
        Command::Cov => cmd_cov(cfg),
        Command::CondCov => cmd_cond_cov(cfg),
        Command::Predict => cmd_predict(cfg).map(Outcome::ok),
        Command::Simulate => cmd_simulate(cfg).map(Outcome::ok),
        Command::Asymptotics => cmd_asymptotics(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| CliError::Input(format!("--{flag} is required for this command")))
}

fn need_grid(cfg: &RunConfig) -> Result<GridSpec> {
    cfg.grid
        .ok_or_else(|| CliError::Input("--grid start:end:count is required for this command".into()))
}

fn model(cfg: &RunConfig, h: Hurst) -> Result<PredictionModel> {
    Ok(PredictionModel::new(h).with_rel_tol(cfg.quad_tol)?)
}

/// `--s` if given, else every grid point.
fn s_points(cfg: &RunConfig) -> Result<Vec<f64>> {
    match (cfg.s, cfg.grid) {
        (Some(s), _) => Ok(vec![s]),
        (None, Some(g)) => Ok(g.linear()),
        (None, None) => Err(CliError::Input("give --s or --grid".into())),
    }
}

pub fn cmd_kernel(cfg: &RunConfig) -> Result<Outcome> {
    let h = cfg.require_hurst()?;
    let t = need(cfg.t, "t")?;
    let mut table = Table::new(&["t", "s", "value"]);
    for s in s_points(cfg)? {
        table.push_nums(&[t, s, kernel_k(t, s, h)?]);
    }
    Ok(Outcome::ok(table))
}

pub fn cmd_cov(cfg: &RunConfig) -> Result<Outcome> {
    let h = cfg.require_hurst()?;
    let t = need(cfg.t, "t")?;
    let mut table = Table::new(&["t", "s", "value"]);
    for s in s_points(cfg)? {
        table.push_nums(&[t, s, fbm_cov(t, s, h)?]);
    }
    Ok(Outcome::ok(table))
}

pub fn cmd_cond_cov(cfg: &RunConfig) -> Result<Outcome> {
    let h = cfg.require_hurst()?;
    let (t, u) = (need(cfg.t, "t")?, need(cfg.u, "u")?);
    let m = model(cfg, h)?;
    let mut out = Outcome::ok(Table::new(&["t", "s", "value"]));
    for s in s_points(cfg)? {
        let rep = m.cond_cov_report(t, s, u)?;
        if !rep.consistent {
            out.warnings.push(format!(
                "cond-cov at (t={t}, s={s}, u={u}): the two covariance forms differ ({} vs {})",
                rep.value, rep.alternative
            ));
        }
        out.table.push_nums(&[t, s, rep.value]);
    }
    Ok(out)
}

/// Mean and pointwise standard deviation of the conditional law on the `--grid`.
pub fn cmd_predict(cfg: &RunConfig) -> Result<Table> {
    let h = cfg.require_hurst()?;
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Input("--in is required for predict".into()))?;
    let path = read_path_file(input)?;
    let grid = need_grid(cfg)?.linear();
    let law = model(cfg, h)?.build_law(&path, &grid)?;
    let mut table = Table::new(&["t", "mean", "std"]);
    for ((t, m), sd) in law.grid.iter().zip(&law.mean).zip(law.std_dev()) {
        table.push_nums(&[*t, *m, sd]);
    }
    Ok(table)
}

/// Long format `path,t,value`: conditional paths when `--in` is given, plain fBm otherwise.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Table> {
    let h = cfg.require_hurst()?;
    let grid = need_grid(cfg)?.linear();
    let samples = match cfg.input.as_deref() {
        Some(input) => {
            let path = read_path_file(input)?;
            let law = model(cfg, h)?.build_law(&path, &grid)?;
            sample_conditional_paths(&law, cfg.paths, cfg.seed)?
        }
        None => {
            let gg = build_grid_gaussian(&grid, h)?;
            // the sampler draws at least two paths; extra rows are dropped below
            let mc = MCConfig::new(cfg.paths.max(2), cfg.seed, false)?;
            sample_fbm(&gg, &mc)?
        }
    };
    let mut table = Table::new(&["path", "t", "value"]);
    for p in 0..cfg.paths {
        for (t, x) in grid.iter().zip(samples.row(p)) {
            table.push(vec![p.to_string(), fmt_num(*t), fmt_num(*x)]);
        }
    }
    Ok(table)
}

fn default_grid(kind: SweepKind) -> GridSpec {
    let (start, end, count) = match kind {
        SweepKind::G => (1e-4, 0.5, 40),
        SweepKind::F | SweepKind::Offdiag => (0.5, 0.9999, 40),
        SweepKind::CondVar => (0.01, 0.99, 100),
    };
    GridSpec { start, end, count }
}

fn full_info_only(h: Hurst) -> Result<()> {
    if h.is_near_half() {
        return Err(CliError::Input("full-information sweeps need --hurst != 0.5".into()));
    }
    Ok(())
}

/// `u,value` sweep plus a `name,value` fit summary over the decade nearest the limit point.
pub fn cmd_asymptotics(cfg: &RunConfig) -> Result<Outcome> {
    let h = cfg.require_hurst()?;
    let spec = cfg.grid.unwrap_or_else(|| default_grid(cfg.sweep));
    let mut table = Table::new(&["u", "value"]);
    let mut summary = Table::new(&["name", "value"]);
    let near_limit = |lo: f64, hi: f64| (lo, (10.0 * lo).min(hi));
    let fit_rows = |summary: &mut Table, regime: Regime, lo: f64, hi: f64| -> Result<()> {
        let rep = asymptotics::sweep(regime, h, lo, hi, 8)?;
        summary.push(vec!["regime".into(), regime.name().into()]);
        for (name, v) in [
            ("fitted_exponent", rep.fitted_exponent),
            ("target_exponent", rep.target_exponent),
            ("fitted_constant", rep.fitted_constant),
            ("extrapolated_constant", rep.extrapolated_constant),
            ("target_constant", rep.target_constant),
            ("r_squared", rep.r_squared),
        ] {
            summary.push(vec![name.into(), fmt_num(v)]);
        }
        Ok(())
    };
    let unit = |x: f64| x > 0.0 && x < 1.0;
    if !(unit(spec.start) && unit(spec.end)) {
        return Err(CliError::Input("sweep grid must lie inside (0, 1)".into()));
    }
    match cfg.sweep {
        SweepKind::G => {
            let regime = Regime::no_info(h)?;
            for u in spec.geometric()? {
                table.push_nums(&[u, g_diagnostic(u, h)?]);
            }
            let (lo, hi) = near_limit(spec.start, spec.end);
            fit_rows(&mut summary, regime, lo, hi)?;
        }
        SweepKind::F | SweepKind::Offdiag => {
            full_info_only(h)?;
            let dist = GridSpec::new(1.0 - spec.end, 1.0 - spec.start, spec.count)?.geometric()?;
            let m = model(cfg, h)?;
            let p = h.value() + 0.5;
            let c = c_full_info(h, 2.0, 1.0)?;
            for &d in dist.iter().rev() {
                let u = 1.0 - d;
                let v = if cfg.sweep == SweepKind::F {
                    f_diagnostic(u, h)?
                } else {
                    m.cond_cov(2.0, 1.0, u)? / (c * d.powf(p))
                };
                table.push_nums(&[u, v]);
            }
            let regime = if cfg.sweep == SweepKind::F {
                Regime::FullInfoDiag
            } else {
                Regime::FullInfoOffDiag
            };
            let (lo, hi) = near_limit(1.0 - spec.end, 1.0 - spec.start);
            fit_rows(&mut summary, regime, lo, hi)?;
        }
        SweepKind::CondVar => {
            let m = model(cfg, h)?;
            let us = spec.linear();
            let vals = us.iter().map(|&u| m.cond_cov(1.0, 1.0, u)).collect::<std::result::Result<Vec<_>, _>>()?;
            for (u, v) in us.iter().zip(&vals) {
                table.push_nums(&[*u, *v]);
            }
            let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
            let second: Vec<f64> = vals.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
            let lo = second.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = second.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            summary.push(vec!["strictly_decreasing".into(), u8::from(decreasing).to_string()]);
            summary.push(vec!["min_second_difference".into(), fmt_num(lo)]);
            summary.push(vec!["max_second_difference".into(), fmt_num(hi)]);
        }
    }
    Ok(Outcome {
        code: EXIT_OK,
        table,
        summary: Some(summary),
        warnings: Vec::new(),
    })
}
