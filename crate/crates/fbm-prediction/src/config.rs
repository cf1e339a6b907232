//! Run configuration: built-in defaults, a flat `key=value` file, and command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use fbm_prediction_core::fbm::KERNEL_REL_TOL;
use fbm_prediction_core::Hurst;

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_PATHS: usize = 100;
pub const DEFAULT_QUAD_TOL: f64 = KERNEL_REL_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Kernel,
    Cov,
    CondCov,
    Predict,
    Simulate,
    Asymptotics,
    Verify,
}

/// Which curve `asymptotics` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// `g(u)` as `u → 0`
    G,
    /// `f(u)` as `u → 1`
    F,
    /// `r̂(1,1|u)` over `(0, 1)`
    CondVar,
    /// `r̂(2,1|u) / (c (1-u)^{H+1/2})` as `u → 1`
    Offdiag,
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// `start:end:count`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(CliError::Input("grid count must be at least 1".into()));
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err(CliError::Input("grid bounds must be finite".into()));
        }
        if count > 1 && !(end > start) {
            return Err(CliError::Input("grid end must exceed start".into()));
        }
        Ok(Self { start, end, count })
    }

    /// Evenly spaced, both ends included.
    pub fn linear(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + step * i as f64 })
            .collect()
    }

    /// Geometrically spaced, both ends included; needs `0 < start`.
    pub fn geometric(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0) {
            return Err(CliError::Input("geometric grid needs a positive start".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let ratio = (self.end / self.start).ln() / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start * (ratio * i as f64).exp() })
            .collect())
    }
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Input(format!("grid `{s}` is not start:end:count")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("grid `{s}`: bad number `{p}`")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("grid `{s}`: bad count `{}`", parts[2])))?;
        GridSpec::new(num(parts[0])?, num(parts[1])?, count)
    }
}

/// One layer of settings. Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub hurst: Option<f64>,
    pub u: Option<f64>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub grid: Option<GridSpec>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub quad_tol: Option<f64>,
    pub sweep: Option<SweepKind>,
    pub corrupt_dh: Option<f64>,
}

impl Settings {
    /// Parses the flat `key=value` format. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {line_no}: expected key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| CliError::Input(format!("config line {line_no}: bad {what} `{value}`"));
            let real = || value.parse::<f64>().map_err(|_| bad("number"));
            match key.replace('-', "_").as_str() {
                "hurst" | "h" => out.hurst = Some(real()?),
                "u" => out.u = Some(real()?),
                "t" => out.t = Some(real()?),
                "s" => out.s = Some(real()?),
                "grid" => {
                    out.grid = Some(
                        value
                            .parse()
                            .map_err(|e: CliError| CliError::Input(format!("config line {line_no}: {e}")))?,
                    )
                }
                "in" | "input" => out.input = Some(PathBuf::from(value)),
                "out" | "output" => out.output = Some(PathBuf::from(value)),
                "seed" => out.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "paths" => out.paths = Some(value.parse().map_err(|_| bad("path count"))?),
                "quad_tol" => out.quad_tol = Some(real()?),
                "sweep" => out.sweep = Some(value.parse().map_err(|_| bad("sweep"))?),
                _ => return Err(CliError::Input(format!("config line {line_no}: unknown key `{key}`"))),
            }
        }
        Ok(out)
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            hurst: self.hurst.or(lower.hurst),
            u: self.u.or(lower.u),
            t: self.t.or(lower.t),
            s: self.s.or(lower.s),
            grid: self.grid.or(lower.grid),
            input: self.input.or(lower.input),
            output: self.output.or(lower.output),
            seed: self.seed.or(lower.seed),
            paths: self.paths.or(lower.paths),
            quad_tol: self.quad_tol.or(lower.quad_tol),
            sweep: self.sweep.or(lower.sweep),
            corrupt_dh: self.corrupt_dh.or(lower.corrupt_dh),
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` lets `verify` use its own Hurst set; every other command requires it.
    pub hurst: Option<Hurst>,
    pub u: Option<f64>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub grid: Option<GridSpec>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub paths: usize,
    pub quad_tol: f64,
    pub sweep: SweepKind,
    /// Multiplies `d_H` in the verification kernel. Negative-control hook.
    pub corrupt_dh: Option<f64>,
}

impl RunConfig {
    pub fn resolve(command: Command, settings: Settings) -> Result<Self> {
        let hurst = settings.hurst.map(Hurst::new).transpose()?;
        let paths = settings.paths.unwrap_or(DEFAULT_PATHS);
        if paths == 0 {
            return Err(CliError::Input("--paths must be at least 1".into()));
        }
        let quad_tol = settings.quad_tol.unwrap_or(DEFAULT_QUAD_TOL);
        if !(quad_tol > 0.0 && quad_tol < 1.0) {
            return Err(CliError::Input(format!("--quad-tol must lie in (0, 1), got {quad_tol}")));
        }
        Ok(Self {
            command,
            hurst,
            u: settings.u,
            t: settings.t,
            s: settings.s,
            grid: settings.grid,
            input: settings.input,
            output: settings.output,
            seed: settings.seed.unwrap_or(DEFAULT_SEED),
            paths,
            quad_tol,
            sweep: settings.sweep.unwrap_or(SweepKind::G),
            corrupt_dh: settings.corrupt_dh,
        })
    }

    /// Shorthand for commands that need `--hurst`.
    pub fn with_hurst(command: Command, h: f64) -> Result<Self> {
        Self::resolve(
            command,
            Settings {
                hurst: Some(h),
                ..Settings::default()
            },
        )
    }

    pub fn require_hurst(&self) -> Result<Hurst> {
        self.hurst
            .ok_or_else(|| CliError::Input("--hurst is required for this command".into()))
    }
}
