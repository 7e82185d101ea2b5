//! Experiment runner behind the `ripd` binary: reads a TOML config, runs one
//! pipeline from `ripd-core`, writes `<out>/<sub>.csv` and
//! `<out>/<sub>_summary.json`.

pub mod config;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use run::{run, run_to_dir, RunOptions, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}
