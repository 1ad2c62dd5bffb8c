//! Command-line driver: sampled trials, exhaustive enumeration of one
//! configuration, or the full acceptance sweep, reported as JSON or CSV.

mod args;
mod report;

pub use args::{parse_args, Format, Mode, RunConfig, UsageError};
pub use report::{build_report, Report, Summary, TrialRecord};

use std::fs::File;
use std::io::{self, BufWriter, Write};

/// Exit status for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Some verification check failed, or output could not be written.
pub const EXIT_FAILED: i32 = 1;
/// Bad flags or a rejected configuration.
pub const EXIT_USAGE: i32 = 2;

/// Executes a parsed configuration, writes the report, and returns the
/// process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let report = match build_report(config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("twoway: {e}");
            return EXIT_FAILED;
        }
    };
    let rendered = match config.format {
        Format::Json => report.to_json().map_err(|e| e.to_string()),
        Format::Csv => report.to_csv().map_err(|e| e.to_string()),
    };
    let rendered = match rendered {
        Ok(s) => s,
        Err(e) => {
            eprintln!("twoway: cannot serialize report: {e}");
            return EXIT_FAILED;
        }
    };
    if let Err(e) = write_output(config, rendered.as_bytes()) {
        eprintln!("twoway: cannot write report: {e}");
        return EXIT_FAILED;
    }
    if report.summary.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn write_output(config: &RunConfig, bytes: &[u8]) -> io::Result<()> {
    match &config.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(bytes)?;
            w.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}
