//! Command-line front end: generate ensembles, analyze them, fit model
//! parameters, sweep the path loss law, and dump the preset registry.

mod commands;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use uwbchan::fileio::FORMAT_VERSION;

#[derive(Parser)]
#[command(
    name = "uwbchan",
    about = "UWB air-to-ground channel simulator and estimator",
    version
)]
struct Cli {
    /// Base seed; every output records it so runs can be reproduced.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for generated files.
    #[arg(long, global = true, env = "UWBCHAN_OUT", default_value = ".")]
    out: PathBuf,

    /// File format version to emit.
    #[arg(long, global = true, default_value_t = FORMAT_VERSION)]
    format_version: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a channel impulse response ensemble plus its manifest.
    Generate(commands::generate::Args),
    /// Compute PDP, CFR, delay statistics, TOA CDF, and sub-band statistics.
    Analyze(commands::analyze::Args),
    /// Fit channel model parameters from an ensemble.
    Fit(commands::fit::Args),
    /// Evaluate the path loss law over a distance sweep.
    Pathloss(commands::pathloss::Args),
    /// Dump the scenario preset registry.
    Presets(commands::presets::Args),
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    if cli.format_version != FORMAT_VERSION {
        bail!(
            "unsupported format version {} (this build writes version {})",
            cli.format_version,
            FORMAT_VERSION
        );
    }
    let ctx = commands::Context {
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Generate(args) => commands::generate::run(&ctx, args),
        Command::Analyze(args) => commands::analyze::run(&ctx, args),
        Command::Fit(args) => commands::fit::run(&ctx, args),
        Command::Pathloss(args) => commands::pathloss::run(&ctx, args),
        Command::Presets(args) => commands::presets::run(&ctx, args),
    }
}
