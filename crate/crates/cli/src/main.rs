use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod args;
mod commands;
mod config;

use args::Cli;

const EXIT_FAILURE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration file or flag combination.
    Config(String),
    Model(qbs_kernel::Error),
    Io(String),
    /// The invariant suite reported failures.
    Failed(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "cli.config",
            CliError::Model(e) => e.code(),
            CliError::Io(_) => "io",
            CliError::Failed(_) => "validate.failed",
        }
    }

    fn message(&self) -> String {
        let m = match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Failed(m) => m.clone(),
            CliError::Model(e) => e.to_string(),
        };
        m.replace('\n', " ")
    }
}

impl From<qbs_kernel::Error> for CliError {
    fn from(e: qbs_kernel::Error) -> Self {
        CliError::Model(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("code={} message={}", e.code(), e.message());
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
