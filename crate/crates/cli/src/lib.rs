//! Experiment drivers for `lrspec-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::CliError;
