use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use spe_core::runner::{dispatch, RunOptions, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Invariants,
    EntropyCheck,
    Stability,
    Sweep,
    Scale,
}

/// Short pulse equation solver and estimate checker.
#[derive(Debug, Parser)]
#[command(name = "spe", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for trajectories and reports.
    #[arg(long, default_value = "spe-out")]
    out: PathBuf,
    /// Reject u0(0) != g(0) instead of ramping the boundary datum.
    #[arg(long)]
    strict_compat: bool,
    /// Viscosities for `sweep`, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Stability constant C; defaults to 3M² + 1.
    #[arg(long = "stability-C")]
    stability_c: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cmd = match cli.command {
        Command::Solve => Subcommand::Solve,
        Command::Invariants => Subcommand::Invariants,
        Command::EntropyCheck => Subcommand::EntropyCheck,
        Command::Stability => Subcommand::Stability,
        Command::Sweep => Subcommand::Sweep,
        Command::Scale => Subcommand::Scale,
    };
    let opts = RunOptions {
        out: cli.out,
        strict_compat: cli.strict_compat,
        epsilons: cli.epsilons,
        stability_c: cli.stability_c,
    };
    match dispatch(cmd, &cli.scenario, &opts) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.document).expect("json"));
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::from(2)
        }
    }
}
