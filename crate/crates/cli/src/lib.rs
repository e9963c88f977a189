//! Batch front end for PASS positioning experiments: reads a TOML scenario,
//! runs one experiment and writes CSV/JSON tables plus a run manifest.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use commands::{run_command, Command, RunOutcome};
pub use config::{parse_config, ConfigFile, OutputFormat, RunConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error(transparent)]
    Model(pass_positioning::Error),
}

impl ConfigError {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<pass_positioning::Error> for ConfigError {
    fn from(e: pass_positioning::Error) -> Self {
        match e {
            pass_positioning::Error::Config { key, reason } => ConfigError::Invalid { key, reason },
            other => ConfigError::Model(other),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] pass_positioning::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}
