//! Experiment harness for the `clewa-core` learners.
//!
//! Reads experiment configs, runs seeded replicated grids in parallel, writes
//! the run and summary CSVs, fits growth exponents and hosts the acceptance
//! suite used by the `accept` subcommand and the `acceptance` test target.

pub mod acceptance;
pub mod config;
pub mod csvio;
mod error;
pub mod experiment;
pub mod report;

pub use config::{EnvironmentSpec, ExperimentConfig, LearnerSpec, SlopeThresholds};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentOutput, RunRow, SummaryRow};
pub use report::{fit_and_report, ExponentRow, Metric};
