mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use bibuq::models::ModelKind;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Propagate(a) => commands::propagate(a, ModelKind::SecondKind),
        Command::Inject(a) => commands::propagate(a, ModelKind::FirstKind),
        Command::Exercise(a) => commands::exercise(a),
        Command::Report(a) => commands::report(a),
        Command::Stats(a) => commands::stats(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
