#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};

/// Failure of a subcommand, with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Invalid input or configuration (exit 2).
    Invalid(String),
    /// Numerical or I/O failure while running (exit 1).
    Runtime(String),
}

impl From<onlinecs::Error> for CliError {
    fn from(e: onlinecs::Error) -> Self {
        use onlinecs::Error::*;
        match e {
            Config(_) | Domain(_) | DimensionMismatch { .. } => CliError::Invalid(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ONLINECS_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().ok().filter(|&w| w > 0).ok_or_else(|| {
        CliError::Invalid(format!(
            "ONLINECS_WORKERS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| match cli.command {
        Command::Recover(a) => commands::recover(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Offline(a) => commands::offline(a),
        Command::Fisher(a) => commands::fisher(a),
        Command::Fit(a) => commands::fit(a),
        Command::Compare(a) => commands::compare(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("onlinecs: error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("onlinecs: error: {msg}");
            ExitCode::from(1)
        }
    }
}
