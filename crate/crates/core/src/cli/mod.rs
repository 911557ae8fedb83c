//! Config parsing, randomized suites and task dispatch for the command-line binary.

pub mod config;
pub mod suites;
pub mod tasks;

pub use config::{parse_config, ConfigError, RunConfig, Task};
pub use tasks::{run, Outcome, RunError};
