//! Command-line front end for the polaron master-equation solver.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run_subcommand, Subcommand};
pub use config::{parse_config, ConfigError, RunConfig};
