//! Experiment driver for the lubricated qubit Otto engine: TOML
//! configurations, figure presets, sweeps over a worker pool and CSV plus
//! manifest output.

pub mod config;
pub mod presets;
mod run;
pub mod table;

pub use config::{ExperimentConfig, Panel, PanelKind, Profile, SweepAxis};
pub use presets::{preset, PRESETS};
pub use run::{
    run_experiment, CYCLE_FIRST_LAW_TOL, FRICTION_RESIDUAL_TOL, TRAJECTORY_FIRST_LAW_TOL,
};
pub use table::{Cell, Manifest, ResultSet, ResultTable};

use thiserror::Error;

/// Environment variable giving the default worker count.
pub const WORKERS_ENV: &str = "ZENO_OTTO_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown preset `{0}` (see --list-presets)")]
    UnknownPreset(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical ones, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownPreset(_) => 2,
            CliError::Numerical(_) | CliError::Invariant(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// The message without the category prefix.
    pub fn detail(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::UnknownPreset(m)
            | CliError::Numerical(m)
            | CliError::Invariant(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn run_preset(
    id: &str,
    profile: Profile,
    seed: Option<u64>,
    workers: usize,
) -> Result<ResultSet, CliError> {
    let mut config = preset(id, profile)?;
    if let Some(s) = seed {
        config.params.master_seed = s;
    }
    run_experiment(&config, workers)
}
