//! Command-line driver for the interference simulator: config parsing,
//! run orchestration, sample files, manifests and analysis.

pub mod analyze;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod manifest;

pub use error::{CliError, ErrorKind};
