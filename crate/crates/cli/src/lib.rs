//! Command-line front end for `dkw-core`.
//!
//! Every command produces one [`Report`]: an echo of the effective
//! configuration (including the seed and the arguments that reproduce it),
//! summary fields and a table, written as CSV or JSON. The worker count is
//! left out of the echo since it never changes a result.

mod commands;
pub mod config;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use commands::run_command;
pub use config::{Format, RunConfig};
pub use input::{parse_sample_file, parse_sample_str};
pub use report::Report;

/// Name of the environment variable holding the default seed.
pub const SEED_ENV: &str = "DKW_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {token:?} is not a finite number")]
    Parse { line: usize, token: String },
    #[error("sample file has no values")]
    EmptySample,
    #[error(transparent)]
    Core(#[from] dkw_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    /// 2 for anything wrong with the input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(dkw_core::Error::CalibrationFailed(_)) | Self::Output(_) => 1,
            _ => 2,
        }
    }
}

/// Arguments that reproduce the run: the given ones without `--threads`,
/// plus the seed when it came from the environment or the default.
fn replay_argv(args: &[String], seed: u64) -> Vec<String> {
    let mut argv = Vec::with_capacity(args.len() + 2);
    let mut skip_value = false;
    for a in args {
        if std::mem::take(&mut skip_value) {
            continue;
        }
        if a == "--threads" {
            skip_value = true;
        } else if !a.starts_with("--threads=") {
            argv.push(a.clone());
        }
    }
    if !argv.iter().any(|a| a == "--seed" || a.starts_with("--seed=")) {
        argv.push("--seed".into());
        argv.push(seed.to_string());
    }
    argv
}

fn execute(cfg: &RunConfig, argv: Vec<String>) -> Result<String, CliError> {
    let run = || -> Result<String, CliError> {
        let report = run_command(cfg, argv)?;
        match cfg.format {
            Format::Csv => report.to_csv(),
            Format::Json => Ok(report.to_json()),
        }
    };
    match cfg.threads {
        None => run(),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))?
            .install(run),
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report to standard output or `--output`. Returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cfg = match RunConfig::try_parse_from(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let given: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = execute(&cfg, replay_argv(&given, cfg.seed)).and_then(|text| match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
