//! Monte-Carlo experiments and file plumbing behind the `lar` command.

pub mod config;
pub mod design;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod report;
pub mod stats;

pub use config::{Experiment, ExperimentConfig, NoiseMode, SignalSpec, Triple};
pub use design::DesignModel;
pub use error::{HarnessError, Result};
pub use experiment::run;
pub use report::{ExperimentReport, RecordTable, Summary};
