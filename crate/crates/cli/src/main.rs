mod args;
mod commands;
mod config;
mod error;
mod svg;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{usage, Result};

const THREADS_ENV: &str = "BRIDGESTOP_THREADS";

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let (rendered, out) = match &cli.command {
        Command::Beta(a) => (commands::beta(a)?, &a.output.out),
        Command::Value(a) => (commands::value(a)?, &a.output.out),
        Command::Paths(a) => (commands::paths(a)?, &a.output.out),
        Command::Verify(a) => (commands::verify(a)?, &a.output.out),
    };
    match out {
        Some(path) => fs::write(path, &rendered.bytes)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&rendered.bytes)?;
            stdout.flush()?;
        }
    }
    Ok(rendered.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{name}: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
