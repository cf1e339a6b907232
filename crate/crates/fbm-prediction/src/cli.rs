//! Argument parsing and the process-level driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ColorChoice, CommandFactory, FromArgMatches, Parser};

use crate::commands::run;
use crate::config::{Command, GridSpec, RunConfig, Settings, SweepKind};
use crate::error::{CliError, Result};
use crate::io::write_output;

#[derive(Debug, Parser)]
#[command(name = "fbm-predict", version, about = "Prediction law of fractional Brownian motion")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Hurst index in (0, 1)
    #[arg(long)]
    pub hurst: Option<f64>,
    /// conditioning time
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// start:end:count
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// observed path, `time,value` CSV
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// relative tolerance of the covariance integrals
    #[arg(long = "quad-tol")]
    pub quad_tol: Option<f64>,
    /// curve written by `asymptotics`
    #[arg(long, value_enum)]
    pub sweep: Option<SweepKind>,
    /// flat key=value file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "corrupt-dh", hide = true)]
    pub corrupt_dh: Option<f64>,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    s.parse::<GridSpec>().map_err(|e| e.to_string())
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Settings::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
            }
            None => Settings::default(),
        };
        let flags = Settings {
            hurst: self.hurst,
            u: self.u,
            t: self.t,
            s: self.s,
            grid: self.grid,
            input: self.input,
            output: self.out,
            seed: self.seed,
            paths: self.paths,
            quad_tol: self.quad_tol,
            sweep: self.sweep,
            corrupt_dh: self.corrupt_dh,
        };
        RunConfig::resolve(self.command, flags.over(file))
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.csv");
    out.with_file_name(name)
}

fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let outcome = run(cfg)?;
    for w in &outcome.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    write_output(cfg.output.as_deref(), &outcome.table.to_bytes(), stdout)?;
    if let Some(summary) = &outcome.summary {
        match cfg.output.as_deref() {
            Some(out) => write_output(Some(&summary_path(out)), &summary.to_bytes(), stdout)?,
            None => write_output(None, &summary.to_bytes(), stderr)?,
        }
    }
    Ok(outcome.code)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cmd = Cli::command();
    if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        cmd = cmd.color(ColorChoice::Never);
    }
    let parsed = cmd
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match cli.into_config().and_then(|cfg| execute(&cfg, stdout, stderr)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
