mod args;
mod commands;
mod config;

use clap::Parser;
use std::process::ExitCode;

/// Exit statuses: 0 success, 1 validation or runtime failure, 2 usage error.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Failed(String),
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<surfmem::Error> for Failure {
    fn from(e: surfmem::Error) -> Self {
        match e {
            surfmem::Error::InvalidDistance(_) | surfmem::Error::InvalidParameter { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Failed(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
