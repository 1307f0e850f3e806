use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use swarmguard_cli::commands::{
    cmd_detect, cmd_energy, cmd_montecarlo, cmd_simulate, CommandOutcome, Format,
};
use swarmguard_cli::config::ConfigDoc;

#[derive(Parser)]
#[command(
    name = "swarmguard",
    version,
    about = "GPS spoofing detection for UAV swarms, cross-checked against UWB ranging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured flight into replay.bin and truth.csv
    Simulate {
        /// Scenario config file (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for output artifacts
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run detection over a replay stream; exits 2 if spoofing was flagged
    Detect {
        /// Replay file produced by the simulate subcommand
        replay: PathBuf,
        /// Optional config for thresholds and topology
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for output artifacts
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Estimate detection and false-positive rates over seeded trials
    Montecarlo {
        /// Scenario config file (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override the base seed; trial i runs at base + i
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for output artifacts
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Print the ranging and telemetry energy budget
    Energy {
        /// Optional config overriding the default hardware profile
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

fn load(config: &PathBuf) -> Result<ConfigDoc> {
    ConfigDoc::load(config)
}

fn load_optional(config: &Option<PathBuf>) -> Result<ConfigDoc> {
    match config {
        Some(path) => load(path),
        None => Ok(ConfigDoc::default()),
    }
}

fn run() -> Result<CommandOutcome> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            format,
        } => cmd_simulate(&load(config)?, *seed, out, *format),
        Command::Detect {
            replay,
            config,
            out,
            format,
        } => cmd_detect(replay, &load_optional(config)?, out, *format),
        Command::Montecarlo {
            config,
            seed,
            out,
            format,
        } => cmd_montecarlo(&load(config)?, *seed, out, *format),
        Command::Energy { config, format } => cmd_energy(&load_optional(config)?, *format),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(outcome) if outcome.spoofing_detected => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
