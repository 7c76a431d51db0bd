//! Single-problem commands: successive GP on a problem file and the
//! brute-force oracles.

use std::path::Path;

use gp_power::oracle::{grid_search, vertex_enumeration, OracleResult};
use gp_power::power::{feasible_init, sca_solve, InitError, PowerControlProblem, ScaError, ScaOptions, ScaReport};
use gp_power::scenario::watts_to_dbm;
use serde::{Deserialize, Serialize};

use crate::case1::termination_name;
use crate::table::write_rows;
use crate::{db, CliError};

pub const TRAJECTORY_SCHEMA: &str = "gp-power/trajectory/v1";
pub const ALLOCATION_SCHEMA: &str = "gp-power/allocation/v1";
pub const ORACLE_SCHEMA: &str = "gp-power/oracle/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub step_norm_w: f64,
    pub weighted_sum_rate: f64,
    pub gp_kkt: f64,
    pub gp_newton_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationRow {
    pub link: usize,
    pub power_w: f64,
    pub power_dbm: f64,
    pub sinr: f64,
    pub sinr_db: f64,
    pub rate_bps_hz: f64,
    pub muted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub method: String,
    pub points_per_dim: usize,
    pub evaluations: u64,
    pub objective: f64,
}

pub fn allocation_rows(prob: &PowerControlProblem<f64>, p: &[f64]) -> Result<Vec<AllocationRow>, CliError> {
    let sinr = prob.sinr(p).map_err(|e| CliError::Solver(e.to_string()))?;
    let muted = prob.muted_links(p);
    Ok((0..p.len())
        .map(|i| AllocationRow {
            link: i,
            power_w: p[i],
            power_dbm: watts_to_dbm(p[i]),
            sinr: sinr[i],
            sinr_db: db(sinr[i]),
            rate_bps_hz: prob.rate_of(sinr[i]),
            muted: muted.contains(&i),
        })
        .collect())
}

pub fn trajectory_rows(report: &ScaReport<f64>) -> Vec<TrajectoryRow> {
    report
        .trajectory
        .iter()
        .map(|it| TrajectoryRow {
            iteration: it.iteration,
            step_norm_w: it.step_norm,
            weighted_sum_rate: it.weighted_sum_rate,
            gp_kkt: it.gp_kkt,
            gp_newton_steps: it.gp_newton_steps,
        })
        .collect()
}

/// Runs the successive GP from a feasible start (full power when there are
/// no rate floors) and writes `trajectory.csv` and `allocation.csv`.
pub fn solve_file(path: &Path, eps: f64, out: &Path) -> Result<ScaReport<f64>, CliError> {
    let prob = crate::load_problem(path)?;
    let opts = ScaOptions {
        eps,
        ..ScaOptions::default()
    };
    let p0 = feasible_init(&prob, &opts.solver).map_err(|e| match e {
        InitError::Infeasible { slack } => {
            CliError::Infeasible(format!("{}: rate floors unreachable, phase-1 slack {slack}", path.display()))
        }
        e => CliError::Solver(e.to_string()),
    })?;
    let report = sca_solve(&prob, &p0, &opts).map_err(|e| match e {
        ScaError::SolverFailure { status, partial } => {
            CliError::Solver(format!("GP ended with {status:?} at iteration {}", partial.iterations))
        }
        e => CliError::Solver(e.to_string()),
    })?;
    crate::ensure_dir(out)?;
    write_rows(&out.join("trajectory.csv"), TRAJECTORY_SCHEMA, &trajectory_rows(&report))?;
    write_rows(
        &out.join("allocation.csv"),
        ALLOCATION_SCHEMA,
        &allocation_rows(&prob, &report.p_star)?,
    )?;
    Ok(report)
}

pub fn describe(report: &ScaReport<f64>) -> String {
    format!(
        "weighted sum rate {:.9} after {} GP solves ({})",
        report.weighted_sum_rate(),
        report.iterations,
        termination_name(report.termination)
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleMethod {
    Grid,
    Vertex,
}

/// Writes `oracle.csv` (one summary row) and `oracle_allocation.csv`.
pub fn run_oracle(
    path: &Path,
    method: OracleMethod,
    points_per_dim: usize,
    out: &Path,
) -> Result<OracleResult<f64>, CliError> {
    let prob = crate::load_problem(path)?;
    let res = match method {
        OracleMethod::Grid => grid_search(&prob, points_per_dim),
        OracleMethod::Vertex => vertex_enumeration(&prob),
    }
    .map_err(|e| match e {
        gp_power::oracle::OracleError::NoFeasiblePoint => CliError::Infeasible(e.to_string()),
        e => CliError::Input(e.to_string()),
    })?;
    crate::ensure_dir(out)?;
    let row = OracleRow {
        method: match method {
            OracleMethod::Grid => "grid".into(),
            OracleMethod::Vertex => "vertex".into(),
        },
        points_per_dim: match method {
            OracleMethod::Grid => points_per_dim,
            OracleMethod::Vertex => 2,
        },
        evaluations: res.evaluations,
        objective: res.objective,
    };
    write_rows(&out.join("oracle.csv"), ORACLE_SCHEMA, &[row])?;
    write_rows(
        &out.join("oracle_allocation.csv"),
        ALLOCATION_SCHEMA,
        &allocation_rows(&prob, &res.p_best)?,
    )?;
    Ok(res)
}
