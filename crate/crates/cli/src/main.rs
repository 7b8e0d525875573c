mod args;
mod commands;
mod error;
mod figures;
mod output;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use error::CliError;

/// Exit status for an infeasible design under `--strict`.
const EXIT_INFEASIBLE: u8 = 3;

fn execute(cli: Cli) -> Result<bool, CliError> {
    let mut flags = cli.flags;
    flags.merge_config()?;
    let artifact = commands::dispatch(cli.command, &flags)?;
    let default_format = match cli.command {
        Command::Figure { .. } => Format::Csv,
        _ => Format::Json,
    };
    let text = match flags.format.unwrap_or(default_format) {
        Format::Csv => artifact.render_csv(),
        Format::Json => artifact.render_json(),
    };
    match &flags.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(flags.strict && artifact.infeasible)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("design is infeasible: no punishment level sustains cooperation");
            ExitCode::from(EXIT_INFEASIBLE)
        }
        Err(e) => {
            eprintln!("normlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
