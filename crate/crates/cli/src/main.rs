//! `gva`: fit Gaussian variational approximations, check model gradients,
//! compare gradient estimators and benchmark per-iteration cost.

/// `println!` that gives up quietly when stdout is closed, e.g. piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod error;
mod manifest;
mod output;
mod target;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::{bench, fit, gradcheck, replay, synth, varcompare};
use crate::error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "gva", version, about = "Gaussian variational approximation with sparse precision factors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a variational approximation and write the result, summary and trace.
    Fit(fit::FitArgs),
    /// Compare analytic and finite-difference gradients of a model.
    Gradcheck(gradcheck::GradcheckArgs),
    /// Sample both gradient estimators of the mean at a fitted state.
    Varcompare(varcompare::VarcompareArgs),
    /// Time fixed-length fits on simulated data of increasing size.
    Bench(bench::BenchArgs),
    /// Write a simulated data set in one of the bundled CSV layouts.
    Synth(synth::SynthArgs),
    /// Re-run the command recorded in a manifest and compare checksums.
    Replay(replay::ReplayArgs),
}

/// Runs a parsed command. `argv` is the command line without the program
/// name; it is recorded in the run manifest.
pub fn dispatch(command: Command, argv: &[String]) -> CliResult<()> {
    match command {
        Command::Fit(a) => fit::run(&a, argv),
        Command::Gradcheck(a) => gradcheck::run(&a, argv),
        Command::Varcompare(a) => varcompare::run(&a, argv),
        Command::Bench(a) => bench::run(&a, argv),
        Command::Synth(a) => synth::run(&a, argv),
        Command::Replay(a) => replay::run(&a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gva: {e}");
            e.exit_code()
        }
    }
}
