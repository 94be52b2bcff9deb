//! Command-line front end: experiment configs, presets, file formats and reports.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod matching;
pub mod presets;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, Snr};
pub use error::{CliError, CliResult};
pub use report::Report;
