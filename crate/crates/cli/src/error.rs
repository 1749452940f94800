use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("row {row} ({var} = {value}): {source}")]
    Row {
        row: usize,
        var: &'static str,
        value: f64,
        source: geophase::Error,
    },
    #[error("{count} row(s) exceed the engine/closed-form tolerance {tol:e}; worst {worst:e} at row {row}")]
    Tolerance {
        count: usize,
        worst: f64,
        row: usize,
        tol: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 configuration or I/O, 2 numerical failure, 3 capacity exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Row {
                source: geophase::Error::Capacity { .. },
                ..
            } => 3,
            CliError::Row { .. } | CliError::Tolerance { .. } => 2,
        }
    }
}
