//! Command-line front end: flag/config resolution, subcommand dispatch and
//! report emission. The binary is a thin wrapper around [`run`].

// `!(x > 0.0)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub mod commands;
pub mod config;

use config::{Cli, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit status 1.
    Validation(String),
    /// Solver or ODE failure: exit status 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<cir_sldp::Error> for CliError {
    fn from(e: cir_sldp::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("CIR_SLDP_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Validation(format!("CIR_SLDP_THREADS must be a positive integer, got `{v}`")))?;
        cir_sldp::montecarlo::configure_threads(n);
    }
    Ok(())
}

/// Result of one invocation: exit status and the bytes destined for the
/// standard streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: u8,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

fn execute(cli: Cli) -> Result<(Vec<u8>, String, Option<CliError>), CliError> {
    configure_threads()?;
    let cfg = RunConfig::resolve(cli.command, cli.flags)?;
    let output = commands::run(cli.command, &cfg)?;
    let stdout = match &cfg.out {
        Some(path) => {
            std::fs::write(path, output.text.as_bytes())
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
            Vec::new()
        }
        None => output.text.into_bytes(),
    };
    let notes: String = output.warnings.iter().map(|w| format!("{w}\n")).collect();
    Ok((stdout, notes, output.failure))
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Invocation { code: 1, stdout: Vec::new(), stderr: text }
            } else {
                Invocation { code: 0, stdout: text.into_bytes(), stderr: String::new() }
            };
        }
    };
    match execute(cli) {
        Ok((stdout, stderr, None)) => Invocation { code: 0, stdout, stderr },
        Ok((stdout, notes, Some(e))) => Invocation { code: e.exit_code(), stdout, stderr: format!("{notes}{e}\n") },
        Err(e) => Invocation { code: e.exit_code(), stdout: Vec::new(), stderr: format!("{e}\n") },
    }
}
