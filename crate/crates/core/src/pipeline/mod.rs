//! Batch workflow: design, runs, surrogate fit, sensitivities and sampling.
//!
//! Every command reads and writes plain files in one output directory, so
//! stages can be re-run or resumed independently.

pub mod commands;
pub mod config;
pub mod records;

pub use commands::*;
pub use config::{ExperimentConfig, SolverConfig, OUT_DIR_ENV};
pub use records::{DesignInfo, RunRecord, RunResult, RunStatus};
