//! Lot-sizing instance generator and the with/without-diving experiment.

pub mod experiment;
pub mod generate;
pub mod report;
pub mod stats;

pub use experiment::{run_experiment, Arm, ExperimentConfig, ExperimentOutput, InstanceSet, Mode};
pub use generate::{generate, GenError, GenParams};
pub use report::{summarize, write_report, Summary};
