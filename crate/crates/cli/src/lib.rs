//! Command-line harness for `smoothsvm`: training, prediction and the
//! repeated k-fold experiments (σ sweeps and solver/loss comparisons).
//!
//! The experiment functions in [`experiment`] are usable without the
//! argument parser; the binary is a thin wrapper around [`cli::run`].

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod model;
pub mod report;

pub use cli::{run, Cli};
pub use config::{default_pairs, default_sigma_grid, LossSettings, RunConfig, SolverKind, SolverOptions};
pub use error::{CliError, Result};
pub use experiment::{cmd_compare, cmd_cv, cmd_sweep_sigma, cmd_train};
pub use model::ModelFile;
pub use report::{Block, ExperimentReport, ReportFormat, RunRecord, Stat, Summary};
