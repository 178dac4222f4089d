//! Experiment execution and on-disk artifacts.

pub mod config;
pub mod run;
pub mod summary;
pub mod trace;

pub use config::{ExperimentConfig, Overrides, OUTPUT_ROOT_VAR};
pub use run::{run_dir, run_experiment, run_one, RunSummary};
pub use summary::{summarize, SummaryTable};
