//! Command-line front end. Exit codes: 0 success, 1 malformed input,
//! 2 physics-invariant violation, 3 verification failure.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{execute, format_table, Outcome, Output};
pub use config::{Cli, Command, OutputFormat, RunConfig, StateSpec, SystemKind, SystemSpec};
pub use report::{eigen_json, self_check, Report, MEASURE_CONVENTION, SCHEMA_VERSION};

use crate::error::Error;

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const THREADS_ENV: &str = "QORIENT_THREADS";

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) | Error::SingularGram | Error::NoCrossing { .. } | Error::SizeGuard { .. } => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("{THREADS_ENV}={v:?} is not a positive integer"))?;
    // A pool may already exist when called twice in one process (tests).
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_INPUT;
    }
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match execute(&config).and_then(|outcome| emit(&config, outcome)) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(config: &RunConfig, outcome: Outcome) -> crate::Result<i32> {
    let text = match outcome.output {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v)?;
            s.push('\n');
            s
        }
        Output::Text(t) => t,
    };
    match &config.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if let Some(c) = outcome.console {
        std::io::stdout().lock().write_all(c.as_bytes())?;
    }
    Ok(outcome.status)
}
