use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}:{line}: `{key}`: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        key: String,
        message: String,
    },

    #[error("`{key}` {reason}")]
    Validation { key: String, reason: String },

    #[error("override `{0}` does not name an existing key")]
    UnknownKey(String),

    #[error("override `{0}` is not of the form key=value")]
    MalformedOverride(String),

    #[error("override `{key}`: {message}")]
    Override { key: String, message: String },

    #[error("reference samples {}: {message}", path.display())]
    Samples { path: PathBuf, message: String },

    #[error("config tree conversion failed: {0}")]
    Internal(String),
}

/// Failure of a subcommand, tagged with the stage that failed.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{controller} controller aborted: {source}")]
    Simulation {
        controller: &'static str,
        source: qsmc_core::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{failed} of {total} properties failed")]
    Validate { failed: usize, total: usize },
}

impl CliError {
    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Simulation { .. } => "simulation",
            CliError::Output { .. } => "output",
            CliError::Validate { .. } => "validate",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation { .. } => 3,
            CliError::Output { .. } => 4,
            CliError::Validate { .. } => 5,
        }
    }
}
