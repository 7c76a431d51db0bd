//! Experiment harness: Case 1 (global optimality over random starts),
//! Case 2 (cellular-UAV uplink), and per-file solve / oracle / export.

pub mod case1;
pub mod case2;
pub mod export;
pub mod solve;
pub mod table;

use std::path::{Path, PathBuf};

use gp_power::power::PowerControlProblem;
use gp_power::scenario::NetworkConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// No allocation meets the constraints; exit code 2.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("solver: {0}")]
    Solver(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Infeasible(_) => 2,
            _ => 1,
        }
    }
}

/// Reads a JSON problem file. Errors carry the file name plus either the
/// JSON line/column or the offending field.
pub fn load_problem(path: &Path) -> Result<PowerControlProblem<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    PowerControlProblem::from_json_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> Result<NetworkConfig, CliError> {
    let cfg = match path {
        None => NetworkConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
    };
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(cfg)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn db(x: f64) -> f64 {
    10.0 * x.log10()
}
