//! `dnls`: solvers and checks for the 2D NLS equation with a point interaction.
//!
//! Exit codes: 0 success, 2 configuration error, 3 non-convergence,
//! 4 failed verification gate, 1 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "dnls",
    version,
    about = "Ground states and action minimizers for NLS with a point interaction"
)]
struct Cli {
    #[command(subcommand)]
    command: config::Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
