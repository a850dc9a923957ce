//! Configuration-driven runner for the persistence experiments.
//!
//! A run is one flat TOML file naming a subcommand. [`parse_config`]
//! validates the whole document up front, [`run_experiment`] dispatches to
//! `persistence-core` and writes a CSV (where the subcommand has rows) and
//! a JSON report under the output directory.

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;

pub use config::{parse_config, ConfigError, ConfigErrors, ExperimentConfig, ParsedConfig, Subcommand};
pub use report::{RunReport, SCHEMA_VERSION};
pub use run::{compute, run_experiment, Computed, Failure};

/// Command-line and environment overrides, applied over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
    }
}
