use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use crsim_cli::{cmd_oracle, cmd_run, cmd_sweep, ExperimentSpec, Overrides, SpecFile, StrategyChoice};

/// Monte Carlo simulator of occupancy-aware channel selection in a
/// cognitive radio network.
#[derive(Parser)]
#[command(name = "crsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and emit per-node CSV results
    Run(CommonArgs),
    /// Run the experiment once per channel count in the sweep list
    Sweep(CommonArgs),
    /// Print closed-form expectations next to simulated means with z-scores
    Oracle(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment configuration (flags override file values)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Number of channels to generate
    #[arg(long, value_name = "INT")]
    channels: Option<usize>,

    /// Number of CR nodes
    #[arg(long, value_name = "INT")]
    nodes: Option<usize>,

    /// Number of independent trials to average
    #[arg(long, value_name = "INT")]
    trials: Option<usize>,

    /// Measured slots per trial
    #[arg(long, value_name = "INT")]
    slots: Option<usize>,

    /// Channel selection strategy to evaluate
    #[arg(long, value_enum, value_name = "STRATEGY")]
    strategy: Option<StrategyChoice>,

    /// Occupancy sensing: "perfect" or "window:W"
    #[arg(long, value_name = "MODE")]
    sensing: Option<String>,

    /// Master seed; every random stream derives from it
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// CSV output path (a .spec.toml sidecar is written next to it);
    /// prints to stdout when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Channel counts for the sweep command, e.g. --sweep 4,8,12,16
    #[arg(long, value_delimiter = ',', value_name = "INT,...")]
    sweep: Option<Vec<usize>>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentSpec> {
        let file = match &self.config {
            Some(path) => SpecFile::load(path)?,
            None => SpecFile::default(),
        };
        let overrides = Overrides {
            channels: self.channels,
            nodes: self.nodes,
            trials: self.trials,
            slots: self.slots,
            strategy: self.strategy,
            sensing: self.sensing.clone(),
            seed: self.seed,
            out: self.out.clone(),
            sweep: self.sweep.clone(),
        };
        ExperimentSpec::resolve(file, &overrides)
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(&args.resolve()?),
        Command::Sweep(args) => cmd_sweep(&args.resolve()?),
        Command::Oracle(args) => cmd_oracle(&args.resolve()?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
