mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::Cli;

/// Failures that stop a subcommand before it can produce a report.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] impurity_cft::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use impurity_cft::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                E::InvalidParameter(_)
                | E::CutoffTooSmall { .. }
                | E::InvalidMode(_)
                | E::Unsupported(_)
                | E::FusionRing(_)
                | E::Json(_),
            ) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = cli.config.as_deref().map(config::load).transpose()?;
    let outcome = commands::execute(&cli.command, config.as_ref(), cli.cache_dir.as_deref())?;
    for d in &outcome.diagnostics {
        eprintln!("violated: {d}");
    }
    output::emit(cli.command.name(), &outcome, cli.format, cli.out.as_deref())?;
    Ok(outcome.passed)
}
