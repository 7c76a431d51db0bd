//! Link-budget pieces: antenna pattern, log-distance path loss, thermal
//! noise, fractional open-loop power control and dB helpers.

use serde::{Deserialize, Serialize};

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Wraps an angle in degrees into (−180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Sector antenna: parabolic-in-dB cuts in azimuth and elevation, summed
/// and clamped at the front-to-back floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaPattern {
    pub hpbw_az_deg: f64,
    pub hpbw_el_deg: f64,
    pub peak_gain_dbi: f64,
    /// Largest attenuation relative to boresight (dB, positive).
    pub max_attenuation_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        Self {
            hpbw_az_deg: 120.0,
            hpbw_el_deg: 13.0,
            peak_gain_dbi: 14.0,
            max_attenuation_db: 25.0,
        }
    }
}

impl AntennaPattern {
    /// Pattern relative to boresight in dB (≤ 0). Offsets in degrees.
    pub fn relative_gain_db(&self, azimuth_off: f64, elevation_off: f64) -> f64 {
        let a_max = self.max_attenuation_db;
        let az = (12.0 * (wrap_deg(azimuth_off) / self.hpbw_az_deg).powi(2)).min(a_max);
        let el = (12.0 * (wrap_deg(elevation_off) / self.hpbw_el_deg).powi(2)).min(a_max);
        -(az + el).min(a_max)
    }

    pub fn gain_dbi(&self, azimuth_off: f64, elevation_off: f64) -> f64 {
        self.peak_gain_dbi + self.relative_gain_db(azimuth_off, elevation_off)
    }
}

/// `PL(d) = intercept + 10·exponent·log10(d / d0)` in dB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel {
    pub exponent: f64,
    pub intercept_db: f64,
    pub reference_distance_m: f64,
    /// Carrier the default intercept was derived from; informational.
    pub frequency_hz: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self::free_space_anchored(2.2, 2e9)
    }
}

impl PathLossModel {
    /// Intercept set to free-space loss at 1 m for the given carrier.
    pub fn free_space_anchored(exponent: f64, frequency_hz: f64) -> Self {
        Self {
            exponent,
            intercept_db: 20.0 * (4.0 * std::f64::consts::PI * frequency_hz / SPEED_OF_LIGHT).log10(),
            reference_distance_m: 1.0,
            frequency_hz,
        }
    }

    pub fn loss_at(&self, distance_m: f64) -> Option<f64> {
        if !(distance_m > 0.0) {
            return None;
        }
        Some(self.intercept_db + 10.0 * self.exponent * (distance_m / self.reference_distance_m).log10())
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Path loss between two 3-D points; `None` when they coincide.
pub fn path_loss(tx: [f64; 3], rx: [f64; 3], model: &PathLossModel) -> Option<f64> {
    model.loss_at(distance(tx, rx))
}

/// `k_B·T·B` in watts.
pub fn thermal_noise(bandwidth_hz: f64, temperature_k: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz
}

/// Fractional path-loss compensation `min(p_max, P0 + α·PL)`, all in dB(m).
pub fn olpc_power(coupling_loss_db: f64, p0_dbm: f64, alpha: f64, p_max_dbm: f64) -> f64 {
    (p0_dbm + alpha * coupling_loss_db).min(p_max_dbm)
}
