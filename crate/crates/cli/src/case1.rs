//! Random-start study on a small network: how often the successive GP
//! reaches the grid-search optimum.

use std::path::Path;

use gp_power::oracle::{grid_search, OracleResult};
use gp_power::power::{sca_solve, PowerControlProblem, ScaOptions, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::table::write_rows;
use crate::CliError;

pub const RUNS_SCHEMA: &str = "gp-power/case1-runs/v1";
pub const SUMMARY_SCHEMA: &str = "gp-power/case1-summary/v1";

/// A start counts as globally optimal within this relative objective gap.
pub const SUCCESS_GAP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct Case1Options {
    pub inits: usize,
    pub seed: u64,
    pub eps: f64,
    pub grid_points: usize,
}

impl Default for Case1Options {
    fn default() -> Self {
        Self {
            inits: 1000,
            seed: 0,
            eps: 1e-6,
            grid_points: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case1Run {
    pub index: usize,
    pub objective: f64,
    pub rel_gap: f64,
    pub success: bool,
    pub iterations: usize,
    pub termination: String,
}

#[derive(Clone, Debug)]
pub struct Case1Summary {
    pub runs: Vec<Case1Run>,
    pub oracle: OracleResult<f64>,
    pub best_objective: f64,
    pub success_fraction: f64,
    pub failures: usize,
}

#[derive(Serialize, Deserialize)]
struct SummaryRow {
    inits: usize,
    seed: u64,
    oracle_objective: f64,
    best_objective: f64,
    best_rel_gap: f64,
    success_fraction: f64,
    failures: usize,
}

/// `count` points drawn uniformly per coordinate in `[p_min, p_max]`.
pub fn random_inits(prob: &PowerControlProblem<f64>, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..prob.links())
                .map(|i| rng.gen_range(prob.p_min()[i]..=prob.p_max()[i]))
                .collect()
        })
        .collect()
}

pub fn run_case1(prob: &PowerControlProblem<f64>, opts: &Case1Options) -> Result<Case1Summary, CliError> {
    let inits = random_inits(prob, opts.inits, opts.seed);
    run_case1_from(prob, &inits, opts)
}

/// Runs the given starts. Runs whose GP fails count as unsuccessful.
pub fn run_case1_from(
    prob: &PowerControlProblem<f64>,
    inits: &[Vec<f64>],
    opts: &Case1Options,
) -> Result<Case1Summary, CliError> {
    if inits.is_empty() {
        return Err(CliError::Input("at least one initialization is required".into()));
    }
    let oracle = grid_search(prob, opts.grid_points).map_err(|e| CliError::Solver(e.to_string()))?;
    let sca = ScaOptions {
        eps: opts.eps,
        ..ScaOptions::default()
    };
    let runs: Vec<Case1Run> = inits
        .par_iter()
        .enumerate()
        .map(|(index, p0)| match sca_solve(prob, p0, &sca) {
            Ok(r) => {
                let objective = r.weighted_sum_rate();
                let rel_gap = (oracle.objective - objective) / oracle.objective;
                Case1Run {
                    index,
                    objective,
                    rel_gap,
                    success: rel_gap <= SUCCESS_GAP,
                    iterations: r.iterations,
                    termination: termination_name(r.termination).into(),
                }
            }
            Err(e) => Case1Run {
                index,
                objective: f64::NAN,
                rel_gap: f64::NAN,
                success: false,
                iterations: 0,
                termination: format!("error: {e}"),
            },
        })
        .collect();
    let failures = runs.iter().filter(|r| r.objective.is_nan()).count();
    let best_objective = runs
        .iter()
        .map(|r| r.objective)
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let success_fraction = runs.iter().filter(|r| r.success).count() as f64 / runs.len() as f64;
    Ok(Case1Summary {
        runs,
        oracle,
        best_objective,
        success_fraction,
        failures,
    })
}

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Tolerance => "tolerance",
        Termination::Stalled => "stalled",
        Termination::IterationCap => "iteration_cap",
    }
}

impl Case1Summary {
    pub fn write(&self, dir: &Path, seed: u64) -> Result<(), CliError> {
        write_rows(&dir.join("case1_runs.csv"), RUNS_SCHEMA, &self.runs)?;
        let row = SummaryRow {
            inits: self.runs.len(),
            seed,
            oracle_objective: self.oracle.objective,
            best_objective: self.best_objective,
            best_rel_gap: (self.oracle.objective - self.best_objective) / self.oracle.objective,
            success_fraction: self.success_fraction,
            failures: self.failures,
        };
        write_rows(&dir.join("case1_summary.csv"), SUMMARY_SCHEMA, &[row])
    }
}
