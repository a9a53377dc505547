//! Command-line driver: configuration, reports, certificates and the law cache.

pub mod cache;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub use config::{Command, RunConfig};
pub use report::{Report, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] bpbv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 3 for internal invariant violations, 2 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(bpbv::Error::Internal(_)) => 3,
            _ => 2,
        }
    }
}

/// Runs the command and writes the report to `--out` or stdout.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = commands::run(cfg)?;
    let text = report.to_json();
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(report)
}

/// Full entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match config::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = RunConfig::from_flags(cli.command, &cli.flags).and_then(|cfg| execute(&cfg));
    match result {
        Ok(report) => report.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
