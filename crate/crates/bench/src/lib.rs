//! Experiment drivers behind the `cggibbs` command-line tool.
//!
//! Every command is deterministic given its configuration and writes CSV files
//! whose rows end in a `config_hash` column, plus a JSON summary.

pub mod commands;
pub mod common;
pub mod config;
pub mod error;

pub use commands::{execute, Command};
pub use config::{ConfigFile, Params};
pub use error::{BenchError, BenchResult};
