use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use super::EXIT_USAGE;
use crate::error::Error;
use crate::protocol::ProtocolConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Born-rule sampled runs on fresh Haar-random inputs.
    Sample,
    /// Exhaustive branch certificate for one configuration.
    Enumerate,
    /// Certificates for the built-in acceptance configurations.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "twoway", about = "Simulate and verify two-way qudit teleportation", version)]
struct Cli {
    /// Dimension of Alice's teleportee.
    #[arg(long)]
    d1: Option<usize>,
    /// Dimension of Bob's teleportee.
    #[arg(long)]
    d2: Option<usize>,
    /// Dimension of each channel qudit; must be at least d1*d2.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Enumerate)]
    mode: Mode,
    /// Number of sampled runs (sample mode).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` only in sweep mode.
    pub config: Option<ProtocolConfig>,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// A message for the user plus the exit code to terminate with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub message: String,
    pub exit_code: i32,
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: String) -> UsageError {
    UsageError {
        message,
        exit_code: EXIT_USAGE,
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        exit_code: e.exit_code(),
    })?;

    let config = match (cli.mode, cli.d1, cli.d2, cli.d) {
        (Mode::Sweep, ..) => None,
        (_, Some(d1), Some(d2), Some(d)) => Some(ProtocolConfig::new(d1, d2, d).map_err(|e| match e {
            Error::DimensionGate { .. } => usage(format!("error: {e}; the protocol requires d1*d2 <= d")),
            other => usage(format!("error: {other}")),
        })?),
        _ => {
            return Err(usage(
                "error: --d1, --d2 and --d are required outside sweep mode".into(),
            ))
        }
    };
    if cli.mode == Mode::Sample && cli.trials == 0 {
        return Err(usage("error: --trials must be at least 1".into()));
    }
    Ok(RunConfig {
        config,
        mode: cli.mode,
        trials: cli.trials,
        seed: cli.seed,
        format: cli.format,
        out: cli.out,
    })
}
