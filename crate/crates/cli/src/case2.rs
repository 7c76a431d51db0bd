//! Cellular-UAV uplink study: per realization, OLPC alone, the successive
//! GP seeded with OLPC under OLPC-level QoS floors, and the unconstrained
//! successive GP.

use std::path::Path;

use gp_power::power::{
    feasible_init_with_hint, sca_solve, InitError, PowerControlProblem, ScaError, ScaOptions, Termination,
};
use gp_power::scenario::{build_hex_network, gain_matrix, olpc_allocation, watts_to_dbm, NetworkConfig, Realization, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case1::termination_name;
use crate::table::{write_header, write_rows};
use crate::{db, CliError};

pub const REALIZATIONS_SCHEMA: &str = "gp-power/case2-realizations/v1";
pub const UAVS_SCHEMA: &str = "gp-power/case2-uavs/v1";
pub const CDF_SCHEMA: &str = "gp-power/case2-cdf/v1";
pub const SKIPPED_SCHEMA: &str = "gp-power/case2-skipped/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Successive GP from full power, no rate floors.
    NoQos,
    /// Successive GP from the OLPC allocation, floors at the OLPC SINRs.
    OlpcQos,
    /// Open-loop power control only.
    OlpcOnly,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::NoQos, Mode::OlpcQos, Mode::OlpcOnly];

    pub fn name(self) -> &'static str {
        match self {
            Mode::NoQos => "no-qos",
            Mode::OlpcQos => "olpc-qos",
            Mode::OlpcOnly => "olpc-only",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Case2Options {
    pub realizations: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub eps: f64,
}

impl Default for Case2Options {
    fn default() -> Self {
        Self {
            realizations: 100,
            seed: 0,
            modes: Mode::ALL.to_vec(),
            eps: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModeOutcome {
    pub mode: Mode,
    pub p: Vec<f64>,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub avg_rate: f64,
    pub muted: Vec<usize>,
    /// GP solves; zero for OLPC alone.
    pub iterations: usize,
    pub termination: Option<Termination>,
    /// Weighted sum rate along the iterations, initial point first.
    pub trajectory: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RealizationResult {
    pub index: usize,
    pub seed: u64,
    pub problem: PowerControlProblem<f64>,
    pub olpc: Vec<f64>,
    pub outcomes: Vec<ModeOutcome>,
    pub skipped: Vec<Skipped>,
}

impl RealizationResult {
    pub fn outcome(&self, mode: Mode) -> Option<&ModeOutcome> {
        self.outcomes.iter().find(|o| o.mode == mode)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub realization: usize,
    pub seed: u64,
    pub mode: Mode,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Case2Summary {
    pub results: Vec<RealizationResult>,
}

impl Case2Summary {
    pub fn skipped(&self) -> impl Iterator<Item = &Skipped> {
        self.results.iter().flat_map(|r| r.skipped.iter())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationRow {
    pub realization: usize,
    pub seed: u64,
    pub mode: Mode,
    pub avg_rate_bps_hz: f64,
    pub min_rate_bps_hz: f64,
    pub muted: usize,
    pub iterations: usize,
    pub termination: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavRow {
    pub realization: usize,
    pub uav: usize,
    pub mode: Mode,
    pub power_w: f64,
    pub power_dbm: f64,
    pub sinr_db: f64,
    pub rate_bps_hz: f64,
    pub muted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub mode: Mode,
    pub rate_bps_hz: f64,
    pub cdf: f64,
}

fn outcome(prob: &PowerControlProblem<f64>, mode: Mode, p: Vec<f64>) -> Result<ModeOutcome, CliError> {
    let sinr = prob.sinr(&p).map_err(|e| CliError::Solver(e.to_string()))?;
    let rates: Vec<f64> = sinr.iter().map(|&g| prob.rate_of(g)).collect();
    let avg_rate = rates.iter().sum::<f64>() / rates.len() as f64;
    Ok(ModeOutcome {
        mode,
        muted: prob.muted_links(&p),
        p,
        sinr,
        rates,
        avg_rate,
        iterations: 0,
        termination: None,
        trajectory: Vec::new(),
    })
}

fn describe_sca(e: ScaError<f64>) -> String {
    match e {
        ScaError::SolverFailure { status, partial } => {
            format!("GP ended with {status:?} at iteration {}", partial.iterations)
        }
        e => e.to_string(),
    }
}

/// Drops one realization and evaluates the requested modes on it. Modes
/// that cannot be solved are recorded in `skipped`.
pub fn solve_realization(
    scn: &Scenario,
    index: usize,
    seed: u64,
    modes: &[Mode],
    sca: &ScaOptions<f64>,
) -> Result<RealizationResult, CliError> {
    let real = Realization::generate(scn, seed);
    let prob = gain_matrix(scn, &real).map_err(|e| CliError::Input(e.to_string()))?;
    let olpc = olpc_allocation(&scn.config, &prob);
    let mut outcomes = Vec::new();
    let mut skipped = Vec::new();
    let mut skip = |mode, reason: String| {
        skipped.push(Skipped {
            realization: index,
            seed,
            mode,
            reason,
        })
    };
    for &mode in modes {
        let run = match mode {
            Mode::OlpcOnly => {
                outcomes.push(outcome(&prob, mode, olpc.clone())?);
                continue;
            }
            Mode::NoQos => sca_solve(&prob, prob.p_max(), sca).map(|r| (r, prob.clone())),
            Mode::OlpcQos => {
                let floors = prob.sinr(&olpc).map_err(|e| CliError::Solver(e.to_string()))?;
                let qprob = prob
                    .clone()
                    .with_gamma_min(floors)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                let init = match feasible_init_with_hint(&qprob, Some(&olpc), &sca.solver) {
                    Ok(p) => p,
                    Err(InitError::Infeasible { slack }) => {
                        skip(mode, format!("QoS floors infeasible, phase-1 slack {slack}"));
                        continue;
                    }
                    Err(e) => {
                        skip(mode, e.to_string());
                        continue;
                    }
                };
                sca_solve(&qprob, &init, sca).map(|r| (r, qprob))
            }
        };
        match run {
            Ok((r, solved)) => {
                let mut o = outcome(&solved, mode, r.p_star.clone())?;
                o.iterations = r.iterations;
                o.termination = Some(r.termination);
                o.trajectory = r.trajectory.iter().map(|it| it.weighted_sum_rate).collect();
                outcomes.push(o);
            }
            Err(e) => skip(mode, describe_sca(e)),
        }
    }
    Ok(RealizationResult {
        index,
        seed,
        problem: prob,
        olpc,
        outcomes,
        skipped,
    })
}

/// Realization `k` uses seed `seed + k`. Realizations run in parallel and
/// are returned in index order.
pub fn run_case2(cfg: &NetworkConfig, opts: &Case2Options) -> Result<Case2Summary, CliError> {
    if opts.realizations == 0 {
        return Err(CliError::Input("realization count must be at least 1".into()));
    }
    if opts.modes.is_empty() {
        return Err(CliError::Input("at least one mode is required".into()));
    }
    let scn = build_hex_network(cfg).map_err(|e| CliError::Input(e.to_string()))?;
    let sca = ScaOptions {
        eps: opts.eps,
        ..ScaOptions::default()
    };
    let results = (0..opts.realizations)
        .into_par_iter()
        .map(|k| solve_realization(&scn, k, opts.seed + k as u64, &opts.modes, &sca))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Case2Summary { results })
}

impl Case2Summary {
    pub fn realization_rows(&self) -> Vec<RealizationRow> {
        let mut rows = Vec::new();
        for r in &self.results {
            for o in &r.outcomes {
                rows.push(RealizationRow {
                    realization: r.index,
                    seed: r.seed,
                    mode: o.mode,
                    avg_rate_bps_hz: o.avg_rate,
                    min_rate_bps_hz: o.rates.iter().copied().fold(f64::INFINITY, f64::min),
                    muted: o.muted.len(),
                    iterations: o.iterations,
                    termination: o.termination.map_or("none", termination_name).into(),
                });
            }
        }
        rows
    }

    pub fn uav_rows(&self) -> Vec<UavRow> {
        let mut rows = Vec::new();
        for r in &self.results {
            for o in &r.outcomes {
                for i in 0..o.p.len() {
                    rows.push(UavRow {
                        realization: r.index,
                        uav: i,
                        mode: o.mode,
                        power_w: o.p[i],
                        power_dbm: watts_to_dbm(o.p[i]),
                        sinr_db: db(o.sinr[i]),
                        rate_bps_hz: o.rates[i],
                        muted: o.muted.contains(&i),
                    });
                }
            }
        }
        rows
    }

    /// Empirical CDF of per-UAV rates pooled over realizations, per mode.
    pub fn cdf_rows(&self) -> Vec<CdfRow> {
        let mut rows = Vec::new();
        for mode in Mode::ALL {
            let mut rates: Vec<f64> = self
                .results
                .iter()
                .filter_map(|r| r.outcome(mode))
                .flat_map(|o| o.rates.iter().copied())
                .collect();
            rates.sort_by(f64::total_cmp);
            let n = rates.len() as f64;
            rows.extend(rates.into_iter().enumerate().map(|(k, rate_bps_hz)| CdfRow {
                mode,
                rate_bps_hz,
                cdf: (k + 1) as f64 / n,
            }));
        }
        rows
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_rows(&dir.join("case2_realizations.csv"), REALIZATIONS_SCHEMA, &self.realization_rows())?;
        write_rows(&dir.join("case2_uavs.csv"), UAVS_SCHEMA, &self.uav_rows())?;
        write_rows(&dir.join("case2_cdf.csv"), CDF_SCHEMA, &self.cdf_rows())?;
        let skipped: Vec<Skipped> = self.skipped().cloned().collect();
        let path = dir.join("case2_skipped.csv");
        if skipped.is_empty() {
            write_header(&path, SKIPPED_SCHEMA, &["realization", "seed", "mode", "reason"])
        } else {
            write_rows(&path, SKIPPED_SCHEMA, &skipped)
        }
    }
}
