//! `wavesnn`: run simulations, self-organization, readout training,
//! analysis and regime sweeps from JSON experiment files.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Common;

#[derive(Parser)]
#[command(name = "wavesnn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Weight snapshot cadence in steps (0: initial snapshot only).
    #[arg(long)]
    snapshot_every: Option<u64>,
}

impl From<CommonArgs> for Common {
    fn from(a: CommonArgs) -> Self {
        Common {
            config: a.config,
            seed: a.seed,
            out: a.out,
            snapshot_every: a.snapshot_every,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the network with learning off.
    Simulate(CommonArgs),
    /// Run with learning on and export weight snapshots.
    Selforganize {
        #[command(flatten)]
        common: CommonArgs,
        /// Also export the spike raster and probe traces.
        #[arg(long)]
        record: bool,
    },
    /// Fit the linear readout on frozen-network spike rates.
    TrainReadout {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory of a selforganize run.
        #[arg(long)]
        weights: PathBuf,
    },
    /// Score a trained readout on the test images.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        weights: PathBuf,
        /// classifier.json written by train-readout.
        #[arg(long)]
        classifier: PathBuf,
    },
    /// Wave and pool metrics from a run's exports.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory of a simulate or selforganize run.
        #[arg(long)]
        record: PathBuf,
    },
    /// Grid search over single-layer dynamics.
    Sweep(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a.into()),
        Command::Selforganize { common, record } => commands::selforganize(&common.into(), record),
        Command::TrainReadout { common, weights } => commands::train_readout(&common.into(), &weights),
        Command::Evaluate {
            common,
            weights,
            classifier,
        } => commands::evaluate(&common.into(), &weights, &classifier),
        Command::Analyze { common, record } => commands::analyze(&common.into(), &record),
        Command::Sweep(a) => commands::sweep(&a.into()),
    };
    match result {
        Ok(m) => {
            println!(
                "{}: {} artifacts, config {}, seed {}",
                m.command,
                m.artifacts.len(),
                &m.config_hash[..12],
                m.seed
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
