mod args;
mod commands;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Exit status classes. Usage errors from argument parsing exit with 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    Computation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Computation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Computation(m) => m,
        }
    }
}

impl From<mpe::Error> for Failure {
    fn from(e: mpe::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Computation(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MPE_LOG", "warn")).format_timestamp(None).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
