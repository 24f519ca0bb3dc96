//! Scenario files, run orchestration and reports for the `qsmc` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

pub use commands::{cmd_compare, cmd_run, cmd_sweep, cmd_validate, Options};
pub use config::{load_scenario, LoadedScenario, ScenarioConfig};
pub use error::{CliError, ConfigError};
