//! The `conley` command: `analyze`, `recurrence` and `sweep` over built-in or
//! user-supplied maps, writing JSON, CSV and DOT files.

pub mod analyze;
pub mod config;
pub mod recur;
pub mod sweep;

use std::ffi::OsString;
use std::path::Path;

use clap::{Parser, Subcommand};

pub use analyze::{cmd_analyze, AnalysisBundle, AnalyzeArgs};
pub use recur::{cmd_recurrence, RecurrenceArgs};
pub use sweep::{cmd_sweep, SweepArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Verification(_) => 1,
            CliError::Cap(_) => 3,
        }
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "conley",
    version,
    about = "Chain recurrence and Lyapunov analysis of maps on grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(args_override_self = true, allow_negative_numbers = true)]
    /// Build the ε-chain graph and compute Morse nodes, attractors and a complete Lyapunov function.
    Analyze(AnalyzeArgs),
    #[command(args_override_self = true, allow_negative_numbers = true)]
    /// Sample return times, optionally checking strong connectivity of the graph.
    Recurrence(RecurrenceArgs),
    #[command(args_override_self = true, allow_negative_numbers = true)]
    /// Tabulate graph statistics over a list of ε values.
    Sweep(SweepArgs),
}

/// What a command reports back besides its files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Whether every check or threshold held.
    pub ok: bool,
    /// Human-readable summary printed to stdout.
    pub summary: String,
}

/// Parses `args` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a).map(|(_, o)| o),
        Command::Recurrence(a) => cmd_recurrence(a).map(|(_, o)| o),
        Command::Sweep(a) => cmd_sweep(a).map(|(_, o)| o),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
