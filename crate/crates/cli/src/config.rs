//! Flag parsing, optional JSON config file, and the resolved run config.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cir_sldp::{ModelParams, Scheme};
use cir_sldp::montecarlo::Method;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "cir-sldp", version, about = "Tail probabilities of the drift MLE for the explosive CIR process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample paths, one `path,t,x` row per grid point
    Simulate,
    /// Drift MLE per simulated path
    Mle,
    /// Rate function over a d-grid
    Rate,
    /// CGF decomposition over a λ-grid inside the domain
    Cgf,
    /// Closed-form tail approximations
    TailApprox,
    /// Monte Carlo tail estimate compared with the approximation
    McTail,
    /// Oracle self-check suite
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Exact,
    Euler,
}

/// `is` is the exponentially tilted proposal, `drift` the constant-drift one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Naive,
    Is,
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// start:stop:step, inclusive of start
    #[arg(long = "d-grid", global = true, allow_hyphen_values = true)]
    pub d_grid: Option<String>,
    #[arg(long = "T", global = true, allow_hyphen_values = true)]
    pub horizon: Option<f64>,
    #[arg(long = "T-grid", global = true, allow_hyphen_values = true)]
    pub horizon_grid: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long = "lambda-grid", global = true, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    #[arg(long = "n-paths", global = true)]
    pub n_paths: Option<usize>,
    #[arg(long = "n-steps", global = true)]
    pub n_steps: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, global = true)]
    pub order: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long = "no-timestamp", global = true)]
    pub no_timestamp: bool,
    /// Flat JSON object with the same keys as the echoed config; flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    b: Option<f64>,
    delta: Option<f64>,
    d: Option<f64>,
    d_grid: Option<String>,
    #[serde(rename = "T")]
    horizon: Option<f64>,
    #[serde(rename = "T_grid")]
    horizon_grid: Option<String>,
    lambda: Option<f64>,
    lambda_grid: Option<String>,
    n_paths: Option<usize>,
    n_steps: Option<usize>,
    seed: Option<u64>,
    scheme: Option<SchemeArg>,
    method: Option<MethodArg>,
    order: Option<u32>,
    format: Option<Format>,
    out: Option<PathBuf>,
    no_timestamp: Option<bool>,
}

/// Fully resolved configuration; serializes to a valid `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub b: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_grid: Option<String>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(rename = "T_grid", skip_serializing_if = "Option::is_none")]
    pub horizon_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<String>,
    pub n_paths: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    pub seed: u64,
    pub scheme: SchemeArg,
    pub method: MethodArg,
    pub order: u32,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub no_timestamp: bool,
}

fn default_paths(cmd: Command) -> usize {
    match cmd {
        Command::Simulate => 1,
        Command::Mle => 1000,
        Command::Verify => 100_000,
        _ => 10_000,
    }
}

impl RunConfig {
    pub fn resolve(cmd: Command, flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let cfg = RunConfig {
            b: flags.b.or(file.b).unwrap_or(1.0),
            delta: flags.delta.or(file.delta).unwrap_or(1.0),
            d: flags.d.or(file.d),
            d_grid: flags.d_grid.or(file.d_grid),
            horizon: flags.horizon.or(file.horizon),
            horizon_grid: flags.horizon_grid.or(file.horizon_grid),
            lambda: flags.lambda.or(file.lambda),
            lambda_grid: flags.lambda_grid.or(file.lambda_grid),
            n_paths: flags.n_paths.or(file.n_paths).unwrap_or(default_paths(cmd)),
            n_steps: flags.n_steps.or(file.n_steps),
            seed: flags.seed.or(file.seed).unwrap_or(1),
            scheme: flags.scheme.or(file.scheme).unwrap_or(SchemeArg::Exact),
            method: flags.method.or(file.method).unwrap_or(MethodArg::Is),
            order: flags.order.or(file.order).unwrap_or(0),
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            out: flags.out.or(file.out),
            no_timestamp: flags.no_timestamp || file.no_timestamp.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, reason: String| Err(CliError::Validation(format!("invalid --{name}: {reason}")));
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return field("delta", format!("must be > 0, got {}", self.delta));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return field("b", format!("must be > 0 (explosive case), got {}", self.b));
        }
        if self.d.is_some() && self.d_grid.is_some() {
            return field("d-grid", "give either --d or --d-grid, not both".into());
        }
        if self.horizon.is_some() && self.horizon_grid.is_some() {
            return field("T-grid", "give either --T or --T-grid, not both".into());
        }
        if let Some(d) = self.d {
            if !d.is_finite() {
                return field("d", format!("must be finite, got {d}"));
            }
        }
        for t in self.horizons()? {
            if !(t.is_finite() && t > 0.0) {
                return field("T", format!("must be > 0, got {t}"));
            }
        }
        self.thresholds()?;
        if let Some(n) = self.n_steps {
            if n < 2 {
                return field("n-steps", format!("must be >= 2, got {n}"));
            }
        }
        if self.n_paths == 0 {
            return field("n-paths", "must be >= 1".into());
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Result<Vec<f64>, CliError> {
        match (&self.d, &self.d_grid) {
            (_, Some(g)) => parse_grid(g, "d-grid"),
            (Some(d), None) => Ok(vec![*d]),
            (None, None) => Ok(vec![]),
        }
    }

    pub fn horizons(&self) -> Result<Vec<f64>, CliError> {
        match (&self.horizon, &self.horizon_grid) {
            (_, Some(g)) => parse_grid(g, "T-grid"),
            (Some(t), None) => Ok(vec![*t]),
            (None, None) => Ok(vec![10.0]),
        }
    }

    pub fn lambdas(&self) -> Result<Option<Vec<f64>>, CliError> {
        match (&self.lambda, &self.lambda_grid) {
            (_, Some(g)) => parse_grid(g, "lambda-grid").map(Some),
            (Some(l), None) => Ok(Some(vec![*l])),
            (None, None) => Ok(None),
        }
    }

    pub fn params(&self, horizon: f64) -> Result<ModelParams, CliError> {
        ModelParams::explosive(self.delta, self.b, horizon).map_err(CliError::from)
    }

    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeArg::Exact => Scheme::ExactGrid,
            SchemeArg::Euler => Scheme::FullTruncationEuler,
        }
    }

    pub fn method(&self) -> Method {
        match self.method {
            MethodArg::Naive => Method::Naive,
            MethodArg::Is => Method::TiltedIs,
            MethodArg::Drift => Method::DriftIs,
        }
    }
}

/// Parses `start:stop:step` into `start, start + step, …` up to and
/// including `stop` (within rounding). Values are rounded to 12 decimals so
/// that grid points such as `1.0` land exactly on regime boundaries.
pub fn parse_grid(spec: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let bad = |reason: String| CliError::Validation(format!("invalid --{name} `{spec}`: {reason}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step".into()));
    }
    let mut nums = [0.0; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("`{part}`: {e}")))?;
        if !slot.is_finite() {
            return Err(bad(format!("`{part}` is not finite")));
        }
    }
    let [start, stop, step] = nums;
    if !(step > 0.0) {
        return Err(bad("step must be > 0".into()));
    }
    if stop < start {
        return Err(bad("stop must be >= start".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(bad(format!("{count} points is too many")));
    }
    Ok((0..count)
        .map(|i| {
            let v = start + i as f64 * step;
            let r = (v * 1e12).round() / 1e12;
            if r == 0.0 { 0.0 } else { r }
        })
        .collect())
}
