//! Experiment harness: configuration, runners and report output.

pub mod error;
pub mod experiments;
pub mod report;

pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, ClassKind, Experiment, ExperimentConfig, SetKind};
pub use report::{emit_report, Cell, Format, Report};
