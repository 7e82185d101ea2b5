use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ripd_cli::{run_to_dir, RunConfig, RunOptions, Subcommand};

/// Rearrangement-invariant norms and doubling experiments on finite metric measure spaces.
#[derive(Parser)]
#[command(name = "ripd", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized test-function families (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Refinement factor for estimator grids.
    #[arg(long, default_value_t = 1)]
    grid_scale: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = RunConfig::load(&args.config).and_then(|cfg| {
        let opts = RunOptions { out: args.out.clone(), seed: args.seed, grid_scale: args.grid_scale };
        run_to_dir(args.subcommand, &cfg, &opts)
    });
    match result {
        Ok((csv, json)) => {
            println!("wrote {} and {}", csv.display(), json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ripd: {e}");
            ExitCode::from(2)
        }
    }
}
