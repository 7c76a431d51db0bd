//! Writes Case-2 realizations as standalone problem files.

use std::path::{Path, PathBuf};

use gp_power::scenario::{build_hex_network, gain_matrix, NetworkConfig, Realization};
use serde::{Deserialize, Serialize};

use crate::table::write_rows;
use crate::CliError;

pub const POSITIONS_SCHEMA: &str = "gp-power/uav-positions/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionRow {
    pub uav: usize,
    pub serving_cell: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub fallback: bool,
}

pub fn problem_file_name(index: usize) -> String {
    format!("realization_{index:03}.json")
}

/// Exports realizations `seed, seed + 1, …` as `realization_NNN.json` plus
/// `realization_NNN_positions.csv`. Returns the problem file paths.
pub fn export_scenarios(
    cfg: &NetworkConfig,
    seed: u64,
    realizations: usize,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    if realizations == 0 {
        return Err(CliError::Input("realization count must be at least 1".into()));
    }
    let scn = build_hex_network(cfg).map_err(|e| CliError::Input(e.to_string()))?;
    crate::ensure_dir(out)?;
    let mut paths = Vec::with_capacity(realizations);
    for k in 0..realizations {
        let real = Realization::generate(&scn, seed + k as u64);
        let prob = gain_matrix(&scn, &real).map_err(|e| CliError::Input(e.to_string()))?;
        let path = out.join(problem_file_name(k));
        std::fs::write(&path, prob.to_json_string()).map_err(|e| CliError::io(&path, e))?;
        let rows: Vec<PositionRow> = real
            .uav_positions
            .iter()
            .enumerate()
            .map(|(i, p)| PositionRow {
                uav: i,
                serving_cell: real.serving[i],
                x_m: p[0],
                y_m: p[1],
                z_m: p[2],
                fallback: real.fallback.contains(&i),
            })
            .collect();
        write_rows(
            &out.join(format!("realization_{k:03}_positions.csv")),
            POSITIONS_SCHEMA,
            &rows,
        )?;
        paths.push(path);
    }
    Ok(paths)
}
