//! Uplink cellular-UAV scenario: a hexagonal grid of three-sector sites,
//! one UAV dropped per sector, and the resulting coupling-gain matrix.

mod radio;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::{PowerControlProblem, ProblemError, DEFAULT_P_MIN};

pub use radio::{
    db_to_linear, dbm_to_watts, distance, linear_to_db, olpc_power, path_loss, thermal_noise, watts_to_dbm,
    wrap_deg, AntennaPattern, PathLossModel, BOLTZMANN, SPEED_OF_LIGHT,
};

/// Rejection-sampling attempts per UAV before falling back to the purely
/// geometric sector test.
const MAX_DROP_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("config field `{field}` {reason}")]
    Config { field: &'static str, reason: String },
    #[error("UAV {uav} coincides with the antenna of cell {cell}")]
    ZeroDistance { uav: usize, cell: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub site_rows: usize,
    pub site_cols: usize,
    pub sectors_per_site: usize,
    pub bs_spacing_m: f64,
    pub bs_height_m: f64,
    pub downtilt_deg: f64,
    pub uav_height_m: f64,
    pub max_ue_power_dbm: f64,
    pub min_ue_power_w: f64,
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
    pub antenna: AntennaPattern,
    pub pathloss: PathLossModel,
    pub olpc_p0_dbm: f64,
    pub olpc_alpha: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            site_rows: 4,
            site_cols: 4,
            sectors_per_site: 3,
            bs_spacing_m: 2000.0,
            bs_height_m: 35.0,
            downtilt_deg: 8.5,
            uav_height_m: 60.0,
            max_ue_power_dbm: 23.0,
            min_ue_power_w: DEFAULT_P_MIN,
            temperature_k: 290.0,
            bandwidth_hz: 18e6,
            antenna: AntennaPattern::default(),
            pathloss: PathLossModel::default(),
            olpc_p0_dbm: -90.8,
            olpc_alpha: 0.8,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |field: &'static str, reason: &str| {
            Err(ScenarioError::Config {
                field,
                reason: reason.to_string(),
            })
        };
        if self.site_rows == 0 || self.site_cols == 0 {
            return bad("site_rows/site_cols", "must be at least 1");
        }
        if self.sectors_per_site == 0 {
            return bad("sectors_per_site", "must be at least 1");
        }
        let positive = [
            ("bs_spacing_m", self.bs_spacing_m),
            ("bs_height_m", self.bs_height_m),
            ("uav_height_m", self.uav_height_m),
            ("min_ue_power_w", self.min_ue_power_w),
            ("temperature_k", self.temperature_k),
            ("bandwidth_hz", self.bandwidth_hz),
            ("antenna.hpbw_az_deg", self.antenna.hpbw_az_deg),
            ("antenna.hpbw_el_deg", self.antenna.hpbw_el_deg),
            ("pathloss.reference_distance_m", self.pathloss.reference_distance_m),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(field, &format!("must be positive, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.olpc_alpha) {
            return bad("olpc_alpha", "must lie in [0, 1]");
        }
        if dbm_to_watts(self.max_ue_power_dbm) < self.min_ue_power_w {
            return bad("max_ue_power_dbm", "is below min_ue_power_w");
        }
        Ok(())
    }

    pub fn p_max_watts(&self) -> f64 {
        dbm_to_watts(self.max_ue_power_dbm)
    }

    pub fn noise_watts(&self) -> f64 {
        thermal_noise(self.bandwidth_hz, self.temperature_k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub site: usize,
    pub sector: usize,
    /// Antenna position (x, y, height).
    pub position: [f64; 3],
    /// Boresight azimuth, degrees counter-clockwise from +x.
    pub azimuth_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub config: NetworkConfig,
    pub sites: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
}

/// Sites on a hexagonal lattice (odd rows shifted by half a spacing), each
/// carrying `sectors_per_site` evenly spaced sectors starting at 0°.
pub fn build_hex_network(cfg: &NetworkConfig) -> Result<Scenario, ScenarioError> {
    cfg.validate()?;
    let d = cfg.bs_spacing_m;
    let row_pitch = d * 3f64.sqrt() / 2.0;
    let mut sites = Vec::with_capacity(cfg.site_rows * cfg.site_cols);
    for r in 0..cfg.site_rows {
        let shift = if r % 2 == 1 { d / 2.0 } else { 0.0 };
        for c in 0..cfg.site_cols {
            sites.push([c as f64 * d + shift, r as f64 * row_pitch]);
        }
    }
    let step = 360.0 / cfg.sectors_per_site as f64;
    let cells = sites
        .iter()
        .enumerate()
        .flat_map(|(s, xy)| {
            (0..cfg.sectors_per_site).map(move |k| Cell {
                site: s,
                sector: k,
                position: [xy[0], xy[1], cfg.bs_height_m],
                azimuth_deg: wrap_deg(k as f64 * step),
            })
        })
        .collect();
    Ok(Scenario {
        config: cfg.clone(),
        sites,
        cells,
    })
}

impl Scenario {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Antenna gain minus path loss from a point to a cell, in dB.
    pub fn coupling_gain_db(&self, cell: usize, pos: [f64; 3]) -> Option<f64> {
        let c = &self.cells[cell];
        let cfg = &self.config;
        let dx = pos[0] - c.position[0];
        let dy = pos[1] - c.position[1];
        let dz = pos[2] - c.position[2];
        let az = dy.atan2(dx).to_degrees() - c.azimuth_deg;
        let el = dz.atan2(dx.hypot(dy)).to_degrees() + cfg.downtilt_deg;
        let pl = path_loss(pos, c.position, &cfg.pathloss)?;
        Some(cfg.antenna.gain_dbi(az, el) - pl)
    }

    fn nearest_site(&self, x: f64, y: f64) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (s, p) in self.sites.iter().enumerate() {
            let d = (p[0] - x).powi(2) + (p[1] - y).powi(2);
            if d < best.0 {
                best = (d, s);
            }
        }
        best.1
    }

    /// No other cell receives `pos` strictly stronger than `cell` does.
    fn is_strongest(&self, cell: usize, pos: [f64; 3]) -> bool {
        let Some(own) = self.coupling_gain_db(cell, pos) else {
            return false;
        };
        (0..self.cells.len()).all(|c| self.coupling_gain_db(c, pos).is_some_and(|g| g <= own))
    }

    fn in_sector(&self, cell: usize, x: f64, y: f64) -> bool {
        let c = &self.cells[cell];
        if self.nearest_site(x, y) != c.site {
            return false;
        }
        let half = 180.0 / self.config.sectors_per_site as f64;
        let az = (y - c.position[1]).atan2(x - c.position[0]).to_degrees();
        wrap_deg(az - c.azimuth_deg).abs() <= half
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub seed: u64,
    /// UAV `i` positions (x, y, height); UAV `i` is served by cell `serving[i]`.
    pub uav_positions: Vec<[f64; 3]>,
    pub serving: Vec<usize>,
    /// UAVs whose drop fell back to the geometric sector test.
    pub fallback: Vec<usize>,
}

impl Realization {
    /// One UAV per cell, uniform over the part of the cell's sector where
    /// that cell is the strongest server.
    pub fn generate(scn: &Scenario, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = scn.config.bs_spacing_m / 3f64.sqrt();
        let h = scn.config.uav_height_m;
        let mut uav_positions = Vec::with_capacity(scn.cell_count());
        let mut fallback = Vec::new();
        for (i, cell) in scn.cells.iter().enumerate() {
            let [cx, cy, _] = cell.position;
            let draw = |rng: &mut ChaCha8Rng| [cx + rng.gen_range(-r..r), cy + rng.gen_range(-r..r), h];
            let mut chosen = None;
            for _ in 0..MAX_DROP_ATTEMPTS {
                let p = draw(&mut rng);
                if scn.in_sector(i, p[0], p[1]) && scn.is_strongest(i, p) {
                    chosen = Some(p);
                    break;
                }
            }
            let p = chosen.unwrap_or_else(|| {
                fallback.push(i);
                loop {
                    let p = draw(&mut rng);
                    if scn.in_sector(i, p[0], p[1]) {
                        break p;
                    }
                }
            });
            uav_positions.push(p);
        }
        Self {
            seed,
            serving: (0..scn.cell_count()).collect(),
            uav_positions,
            fallback,
        }
    }
}

/// Power-control instance of a realization: `G[i][j]` couples UAV `i` to
/// cell `j`, equal weights `1/N`, thermal noise, no SINR floors.
pub fn gain_matrix(scn: &Scenario, real: &Realization) -> Result<PowerControlProblem<f64>, ScenarioError> {
    let n = real.uav_positions.len();
    let mut g = vec![vec![0.0; n]; n];
    for (i, &pos) in real.uav_positions.iter().enumerate() {
        for (j, &cell) in real.serving.iter().enumerate() {
            let db = scn
                .coupling_gain_db(cell, pos)
                .ok_or(ScenarioError::ZeroDistance { uav: i, cell })?;
            g[i][j] = db_to_linear(db);
        }
    }
    let cfg = &scn.config;
    Ok(PowerControlProblem::new(
        g,
        vec![cfg.noise_watts(); n],
        vec![1.0 / n as f64; n],
        vec![cfg.min_ue_power_w; n],
        vec![cfg.p_max_watts(); n],
        vec![0.0; n],
        1.0,
        1.0,
    )?)
}

/// Open-loop allocation: each UAV compensates a fraction of the coupling
/// loss to its serving cell.
pub fn olpc_allocation(cfg: &NetworkConfig, prob: &PowerControlProblem<f64>) -> Vec<f64> {
    (0..prob.links())
        .map(|i| {
            let loss = -linear_to_db(prob.gain(i, i));
            let dbm = olpc_power(loss, cfg.olpc_p0_dbm, cfg.olpc_alpha, cfg.max_ue_power_dbm);
            dbm_to_watts(dbm).clamp(prob.p_min()[i], prob.p_max()[i])
        })
        .collect()
}
