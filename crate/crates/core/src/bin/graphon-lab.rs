//! Command-line front end: `run`, `validate` and `report`.
//!
//! Exit codes: 0 success, 1 error, 2 a gate failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphon_lab::harness::{format_gates, read_records, run_experiment, summarize, ExperimentConfig};

#[derive(Parser)]
#[command(name = "graphon-lab", version, about = "Run and summarize graphon mean-field experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config and check its gates.
    Run { config: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Summarize a `.csv` or `.jsonl` record file.
    Report { records: PathBuf },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> graphon_lab::Result<ExitCode> {
    match command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = run_experiment(&cfg)?;
            print!("{}", summarize(&outcome.records));
            print!("{}", format_gates(&outcome.gates));
            if let Some((csv, jsonl)) = &outcome.outputs {
                println!("wrote {} and {}", csv.display(), jsonl.display());
            }
            Ok(if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            println!("{}: valid {} config", config.display(), cfg.kind.name());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { records } => {
            print!("{}", summarize(&read_records(&records)?));
            Ok(ExitCode::SUCCESS)
        }
    }
}
