//! Error types shared across the simulator.

use thiserror::Error;

/// Errors produced by configuration validation and simulation runs.
#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A run failed after configuration was accepted.
    #[error("run error: {0}")]
    Run(String),

    /// Result file I/O failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Summary serialization failed.
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub fn run(msg: impl Into<String>) -> Self {
        SimError::Run(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
