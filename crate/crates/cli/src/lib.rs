//! Experiment runner for the `curveflow` crate.

pub mod config;
pub mod presets;
pub mod runner;

use curveflow::FlowError;
use serde::Serialize;

pub use config::{Command, ExperimentConfig};
pub use presets::{build_initial_data, InitialData};
pub use runner::{run, Artifacts};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(FlowError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidParameter(msg) => CliError::Config(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> String {
        let body = ErrorJson { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string_pretty(&body).expect("plain data serializes")
    }
}
