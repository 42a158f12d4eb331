//! Experiment layer: configuration, scenarios, replications, metrics and
//! exporters.

pub mod config;
pub mod export;
pub mod metrics;
pub mod runner;
pub mod scenario;
pub mod selftest;

use std::path::PathBuf;

use thiserror::Error;

use crate::engine::EngineError;
use crate::gridworld::GridError;

pub use config::RunConfig;
pub use runner::{
    run_baseline, run_baseline_with, run_experiment, run_experiment_with, Execution, Experiment, MatchReport, RunMetrics,
};
pub use scenario::{build_scenario, scenario_cloister, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Format(_) => 2,
            _ => 1,
        }
    }
}
