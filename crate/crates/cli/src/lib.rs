//! Scenario-driven front end for `polarsim`: JSON scenarios in, CSV, JSON
//! and SVG artifacts out.

use std::path::PathBuf;

use thiserror::Error;

pub mod output;
pub mod pipeline;
pub mod scenario;
pub mod sweep;

pub use pipeline::{run_scenario, Manifest};
pub use scenario::{parse_scenario, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] polarsim::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Scenario(_) | CliError::Model(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_scenario(&text)?)
}
