//! Command-line front end: argument parsing, configuration and the four
//! analysis commands. Every command writes its results below the output
//! directory and returns a short report for the terminal.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{run, Report};
pub use config::{EvolveConfig, ParamsConfig, ProfileConfig, RunConfig, ThresholdConfig};

use crate::error::Error;

/// Environment variable overriding the output directory of the config file.
pub const OUTPUT_DIR_ENV: &str = "TUMORSTAB_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "tumorstab", version, about = "Stability analysis of a tumor with periodic nutrient supply")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (overrides the environment and the config file).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Spatial dimension of the threshold report; 2 adds the planar threshold.
    #[arg(long, global = true, value_enum)]
    pub dim: Option<Dim>,

    /// Highest mode scanned by `modes` and by the stability check of `evolve`.
    #[arg(long, global = true)]
    pub n_scan: Option<usize>,

    /// End time of `evolve`.
    #[arg(long, global = true)]
    pub t_end: Option<f64>,

    /// Seed for random initial data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Periodic radius over one period.
    Orbit,
    /// Critical aggressiveness.
    Threshold,
    /// Per-mode period multipliers and the stability verdict.
    Modes,
    /// Linear evolution of a boundary perturbation.
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dim {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
}

/// Failures of a CLI run, each tied to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("decay requested but the base state is not stable: {0}")]
    NotDecaying(String),
    #[error("perturbation did not decay enough: {0}")]
    NotConverged(String),
}

impl CliError {
    /// 1 configuration or I/O, 2 inadmissible supply, 3 convergence failure,
    /// 4 decay requested at or above the threshold.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Model(Error::Admissibility { .. }) => 2,
            CliError::Model(
                Error::Convergence(_) | Error::NoConvergence { .. } | Error::NonPositiveRadius { .. },
            )
            | CliError::NotConverged(_) => 3,
            CliError::Model(Error::Stability { .. }) | CliError::NotDecaying(_) => 4,
            CliError::Model(_) => 1,
        }
    }
}
