//! `dnb`: verify, compare and classify multidimensional Poisson brackets of
//! hydrodynamic type given as JSON files.
//!
//! Exit status is 0 when every check passes, 1 when a verdict fails and 2
//! for unusable input.

mod commands;
mod files;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Common;
use report::Report;

#[derive(Parser)]
#[command(name = "dnb", version, about = "Exact checks for Poisson brackets of hydrodynamic type")]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Recompute the geometry numerically at sample points and compare.
    #[arg(long, global = true)]
    oracle: bool,
    /// Seed for sample points and random fields.
    #[arg(long, global = true, default_value_t = 20240917)]
    seed: u64,
    /// Number of oracle sample points.
    #[arg(long, global = true, default_value_t = 12)]
    points: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Poisson relations a1 to a7.
    Verify { bracket: PathBuf },
    /// Print the nonzero obstruction tensors.
    Obstructions {
        bracket: PathBuf,
        /// Also print the mixed form `T^{iαβ}_{jk}`.
        #[arg(long)]
        mixed: bool,
    },
    /// Compatibility and pencil analysis of metric pairs.
    Compat { first: PathBuf, second: Option<PathBuf> },
    /// Like `compat`, also listing the Nijenhuis tensor entries.
    Nijenhuis { first: PathBuf, second: Option<PathBuf> },
    /// Decide reducibility to constant form.
    Classify { bracket: PathBuf },
    /// Apply a coordinate change and print the new bracket as JSON.
    Transform {
        bracket: PathBuf,
        change: PathBuf,
        /// The bracket is given in the new coordinates; rewrite it in the old ones.
        #[arg(long)]
        pullback: bool,
        /// Compare the result with this bracket.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Analyse a bracket with constant b and linear metrics.
    Liealg {
        input: PathBuf,
        /// Random field triples for the functional oracle.
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let common = Common { seed: cli.seed, oracle: cli.oracle, points: cli.points };
    match &cli.command {
        Command::Verify { bracket } => commands::verify(bracket, &common),
        Command::Obstructions { bracket, mixed } => commands::obstructions_cmd(bracket, *mixed, &common),
        Command::Compat { first, second } => commands::compat(first, second.as_deref(), false, &common),
        Command::Nijenhuis { first, second } => commands::compat(first, second.as_deref(), true, &common),
        Command::Classify { bracket } => commands::classify(bracket, &common),
        Command::Transform { bracket, change, pullback, expect } => {
            commands::transform_cmd(bracket, change, *pullback, expect.as_deref())
        }
        Command::Liealg { input, trials } => commands::liealg(input, *trials, &common),
    }
}

/// A failed verdict reported as an error still exits with 1.
fn is_verdict(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<dnb_core::Error>(),
            Some(dnb_core::Error::NotAPoissonBracket(_) | dnb_core::Error::Inconsistent(_))
        )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let text = report.render(cli.json);
            match &report.output {
                Some(doc) => {
                    print!("{doc}");
                    eprint!("{text}");
                }
                None => print!("{text}"),
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_verdict(&err) { 1 } else { 2 })
        }
    }
}
