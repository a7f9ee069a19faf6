//! `minphase` command-line tool.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for numeric or domain
//! failures (including unreadable or malformed tap files).

mod args;
mod commands;
mod config;
mod output;
mod ranges;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::FileConfig;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl From<minphase::Error> for Failure {
    fn from(e: minphase::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (file, path) = FileConfig::load(cli.config.as_deref())?;
    let path = path.map(|p| p.display().to_string());
    match cli.command {
        Command::Design(a) => commands::design(&a, &file, path),
        Command::Transform(a) => commands::transform(&a, &file, path),
        Command::Sweep(a) => commands::sweep(&a, &file, path),
        Command::Analyze(a) => commands::analyze(&a, &file, path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
