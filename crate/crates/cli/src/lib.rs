//! Configuration ingestion and job launching for the `mhd` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod params;
pub mod value;

pub use config::{parse_config, parse_str, ConfigError, RunConfig, Violation};
pub use error::{CliError, Result};
