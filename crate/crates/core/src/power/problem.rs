use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Linear gain substituted for zero off-diagonal entries.
pub const GAIN_FLOOR: f64 = 1e-30;
/// Default lower power bound (W); GP variables must stay strictly positive.
pub const DEFAULT_P_MIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("{field}: expected length {expected}, got {got}")]
    Dimension {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("problem file: {0}")]
    Parse(String),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ProblemError {
    ProblemError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Weighted-sum-rate power control instance.
///
/// `gains[i][j]` is the linear gain from transmitter `i` to receiver `j`, so
/// link `i` sees interference `Σ_{j≠i} p_j · gains[j][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerControlProblem<T> {
    gains: Vec<Vec<T>>,
    noise: Vec<T>,
    weights: Vec<T>,
    p_min: Vec<T>,
    p_max: Vec<T>,
    gamma_min: Vec<T>,
    rate_a: T,
    rate_b: T,
}

impl<T: Real> PowerControlProblem<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gains: Vec<Vec<T>>,
        noise: Vec<T>,
        weights: Vec<T>,
        p_min: Vec<T>,
        p_max: Vec<T>,
        gamma_min: Vec<T>,
        rate_a: T,
        rate_b: T,
    ) -> Result<Self, ProblemError> {
        let n = gains.len();
        if n == 0 {
            return Err(invalid("G", "at least one link is required"));
        }
        let dim = |field, v: &Vec<T>| {
            if v.len() != n {
                Err(ProblemError::Dimension {
                    field,
                    expected: n,
                    got: v.len(),
                })
            } else {
                Ok(())
            }
        };
        let mut gains = gains;
        for (i, row) in gains.iter_mut().enumerate() {
            if row.len() != n {
                return Err(ProblemError::Dimension {
                    field: "G row",
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, g) in row.iter_mut().enumerate() {
                if !g.is_finite() || *g < T::zero() {
                    return Err(invalid(format!("G[{i}][{j}]"), "gain must be finite and non-negative"));
                }
                if i == j && *g == T::zero() {
                    return Err(invalid(format!("G[{i}][{i}]"), "direct gain must be positive"));
                }
                if *g == T::zero() {
                    *g = T::lit(GAIN_FLOOR);
                }
            }
        }
        dim("n_watts", &noise)?;
        dim("w", &weights)?;
        dim("p_min_watts", &p_min)?;
        dim("p_max_watts", &p_max)?;
        dim("gamma_min", &gamma_min)?;
        for (i, &v) in noise.iter().enumerate() {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(format!("n_watts[{i}]"), "noise must be positive"));
            }
        }
        for (i, &v) in weights.iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(invalid(format!("w[{i}]"), "weight must be non-negative"));
            }
        }
        if !weights.iter().any(|&v| v > T::zero()) {
            return Err(invalid("w", "at least one weight must be positive"));
        }
        for i in 0..n {
            if !(p_min[i] > T::zero()) || !p_min[i].is_finite() {
                return Err(invalid(format!("p_min_watts[{i}]"), "must be positive"));
            }
            if !(p_max[i] >= p_min[i]) || !p_max[i].is_finite() {
                return Err(invalid(format!("p_max_watts[{i}]"), "must be at least p_min_watts"));
            }
            if !(gamma_min[i] >= T::zero()) || !gamma_min[i].is_finite() {
                return Err(invalid(format!("gamma_min[{i}]"), "must be non-negative"));
            }
        }
        for (name, v) in [("rate_a", rate_a), ("rate_b", rate_b)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(invalid(name, "must lie in (0, 1]"));
            }
        }
        Ok(Self {
            gains,
            noise,
            weights,
            p_min,
            p_max,
            gamma_min,
            rate_a,
            rate_b,
        })
    }

    /// Shannon-rate instance without QoS floors and with `p_min` at the default.
    pub fn unconstrained(
        gains: Vec<Vec<T>>,
        noise: Vec<T>,
        weights: Vec<T>,
        p_max: Vec<T>,
    ) -> Result<Self, ProblemError> {
        let n = gains.len();
        Self::new(
            gains,
            noise,
            weights,
            vec![T::lit(DEFAULT_P_MIN); n],
            p_max,
            vec![T::zero(); n],
            T::one(),
            T::one(),
        )
    }

    pub fn links(&self) -> usize {
        self.gains.len()
    }

    /// Gain from transmitter `tx` to receiver `rx`.
    pub fn gain(&self, tx: usize, rx: usize) -> T {
        self.gains[tx][rx]
    }

    pub fn gains(&self) -> &[Vec<T>] {
        &self.gains
    }

    pub fn noise(&self) -> &[T] {
        &self.noise
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn p_min(&self) -> &[T] {
        &self.p_min
    }

    pub fn p_max(&self) -> &[T] {
        &self.p_max
    }

    pub fn gamma_min(&self) -> &[T] {
        &self.gamma_min
    }

    pub fn rate_a(&self) -> T {
        self.rate_a
    }

    pub fn rate_b(&self) -> T {
        self.rate_b
    }

    pub fn has_qos(&self) -> bool {
        self.gamma_min.iter().any(|&g| g > T::zero())
    }

    pub fn with_gamma_min(mut self, gamma_min: Vec<T>) -> Result<Self, ProblemError> {
        if gamma_min.len() != self.links() {
            return Err(ProblemError::Dimension {
                field: "gamma_min",
                expected: self.links(),
                got: gamma_min.len(),
            });
        }
        self.gamma_min = gamma_min;
        Self::new(
            self.gains,
            self.noise,
            self.weights,
            self.p_min,
            self.p_max,
            self.gamma_min,
            self.rate_a,
            self.rate_b,
        )
    }

    fn check_len(&self, p: &[T]) -> Result<(), ProblemError> {
        if p.len() != self.links() {
            return Err(ProblemError::Dimension {
                field: "p",
                expected: self.links(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Interference-plus-noise seen by each receiver.
    pub fn interference_plus_noise(&self, p: &[T]) -> Result<Vec<T>, ProblemError> {
        self.check_len(p)?;
        let n = self.links();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .fold(self.noise[i], |acc, j| acc + p[j] * self.gains[j][i])
            })
            .collect())
    }

    /// `γ_i = p_i G_ii / (n_i + Σ_{j≠i} p_j G_ji)`.
    pub fn sinr(&self, p: &[T]) -> Result<Vec<T>, ProblemError> {
        let ipn = self.interference_plus_noise(p)?;
        Ok(ipn
            .iter()
            .enumerate()
            .map(|(i, &d)| p[i] * self.gains[i][i] / d)
            .collect())
    }

    /// `a · log2(1 + b γ)` for a single SINR value.
    pub fn rate_of(&self, gamma: T) -> T {
        self.rate_a * (self.rate_b * gamma).ln_1p() / T::lit(2.0).ln()
    }

    pub fn rates(&self, p: &[T]) -> Result<Vec<T>, ProblemError> {
        Ok(self.sinr(p)?.into_iter().map(|g| self.rate_of(g)).collect())
    }

    pub fn weighted_sum_rate(&self, p: &[T]) -> Result<T, ProblemError> {
        Ok(self
            .rates(p)?
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * r)
            .sum())
    }

    /// Smallest SINR link `i` can see anywhere in the power box.
    pub fn sinr_lower_bound(&self, i: usize) -> T {
        let n = self.links();
        let worst = (0..n)
            .filter(|&j| j != i)
            .fold(self.noise[i], |acc, j| acc + self.p_max[j] * self.gains[j][i]);
        self.p_min[i] * self.gains[i][i] / worst
    }

    /// Links whose power is at most twice their lower bound.
    pub fn muted_links(&self, p: &[T]) -> Vec<usize> {
        p.iter()
            .zip(&self.p_min)
            .enumerate()
            .filter(|(_, (&pi, &lo))| pi <= lo * T::lit(2.0))
            .map(|(i, _)| i)
            .collect()
    }

    /// Same physics in other units: gains scale by `gain_k`, every power
    /// quantity (noise, bounds) by `gain_k * power_k` and `power_k`.
    /// SINRs at correspondingly scaled powers are unchanged.
    pub fn rescaled(&self, gain_k: T, power_k: T) -> Self {
        let mut out = self.clone();
        for row in out.gains.iter_mut() {
            for g in row.iter_mut() {
                *g *= gain_k;
            }
        }
        for v in out.noise.iter_mut() {
            *v *= gain_k * power_k;
        }
        for v in out.p_min.iter_mut().chain(out.p_max.iter_mut()) {
            *v *= power_k;
        }
        out
    }

    pub fn cast<U: Real>(&self) -> PowerControlProblem<U> {
        let c = |v: &[T]| v.iter().map(|x| U::lit(x.as_f64())).collect::<Vec<U>>();
        PowerControlProblem {
            gains: self.gains.iter().map(|r| c(r)).collect(),
            noise: c(&self.noise),
            weights: c(&self.weights),
            p_min: c(&self.p_min),
            p_max: c(&self.p_max),
            gamma_min: c(&self.gamma_min),
            rate_a: U::lit(self.rate_a.as_f64()),
            rate_b: U::lit(self.rate_b.as_f64()),
        }
    }
}

/// On-disk problem description (JSON). All powers in watts, gains linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "G")]
    pub gains: Vec<Vec<f64>>,
    pub n_watts: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(default)]
    pub p_min_watts: Option<Vec<f64>>,
    pub p_max_watts: Vec<f64>,
    #[serde(default)]
    pub gamma_min: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub rate_a: f64,
    #[serde(default = "one")]
    pub rate_b: f64,
}

fn one() -> f64 {
    1.0
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<PowerControlProblem<f64>, ProblemError> {
        let n = self.gains.len();
        PowerControlProblem::new(
            self.gains,
            self.n_watts,
            self.w,
            self.p_min_watts.unwrap_or_else(|| vec![DEFAULT_P_MIN; n]),
            self.p_max_watts,
            self.gamma_min.unwrap_or_else(|| vec![0.0; n]),
            self.rate_a,
            self.rate_b,
        )
    }
}

impl From<&PowerControlProblem<f64>> for ProblemFile {
    fn from(p: &PowerControlProblem<f64>) -> Self {
        Self {
            gains: p.gains.clone(),
            n_watts: p.noise.clone(),
            w: p.weights.clone(),
            p_min_watts: Some(p.p_min.clone()),
            p_max_watts: p.p_max.clone(),
            gamma_min: Some(p.gamma_min.clone()),
            rate_a: p.rate_a,
            rate_b: p.rate_b,
        }
    }
}

impl PowerControlProblem<f64> {
    pub fn from_json_str(s: &str) -> Result<Self, ProblemError> {
        let file: ProblemFile =
            serde_json::from_str(s).map_err(|e| ProblemError::Parse(e.to_string()))?;
        file.into_problem()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from(self)).expect("plain data serializes")
    }
}

const EXAMPLE1_JSON: &str = include_str!("../../fixtures/example1.json");

/// The four-link benchmark network used for the global-optimality study.
pub fn example1() -> PowerControlProblem<f64> {
    PowerControlProblem::from_json_str(EXAMPLE1_JSON).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_link() -> PowerControlProblem<f64> {
        PowerControlProblem::unconstrained(
            vec![vec![0.4, 0.1], vec![0.2, 0.3]],
            vec![1e-7, 1e-7],
            vec![1.0, 1.0],
            vec![1e-3, 1e-3],
        )
        .unwrap()
    }

    #[test]
    fn sinr_single_link() {
        let p = PowerControlProblem::unconstrained(vec![vec![0.5_f64]], vec![1e-7], vec![1.0], vec![1e-3]).unwrap();
        let g = p.sinr(&[1e-3]).unwrap();
        assert!((g[0] - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn sinr_two_links() {
        let g = two_link().sinr(&[1e-3, 1e-3]).unwrap();
        let expect0 = 4e-4 / (1e-7 + 2e-4);
        assert!((g[0] - expect0).abs() < 1e-12);
        assert!((g[0] - 1.99900).abs() < 1e-5);
        let expect1 = 3e-4 / (1e-7 + 1e-4);
        assert!((g[1] - expect1).abs() < 1e-12);
    }

    #[test]
    fn rate_formula() {
        let p = two_link();
        assert!((p.rate_of(1.0) - 1.0).abs() < 1e-15);
        let q = PowerControlProblem::new(
            vec![vec![1.0]],
            vec![1.0],
            vec![1.0],
            vec![1e-3],
            vec![1.0],
            vec![0.0],
            0.75,
            0.9,
        )
        .unwrap();
        assert_eq!(q.rate_of(0.0), 0.0);
        assert!((q.rate_of(3.0) - 0.75 * (1.0f64 + 2.7).log2()).abs() < 1e-15);
    }

    #[test]
    fn example1_sinr_at_max_power() {
        // direct evaluation with the published matrix, frozen
        let p = example1();
        let g = p.sinr(p.p_max()).unwrap();
        let expect = [
            23.26137239784117,
            63.70448548812665,
            1.9894295041193846,
            0.6483943546737574,
        ];
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_cross_gain_is_floored_and_negative_rejected() {
        let p = PowerControlProblem::unconstrained(
            vec![vec![1.0, 0.0], vec![0.5, 1.0]],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(p.gain(0, 1), GAIN_FLOOR);
        let err = PowerControlProblem::<f64>::unconstrained(
            vec![vec![1.0, -0.1], vec![0.5, 1.0]],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        )
        .unwrap_err();
        assert!(err.to_string().contains("G[0][1]"), "{err}");
    }

    #[test]
    fn invalid_fields_are_named() {
        let base = || {
            (
                vec![vec![1.0]],
                vec![1.0],
                vec![1.0],
                vec![1e-3],
                vec![1.0],
                vec![0.0],
            )
        };
        let (g, n, w, lo, hi, q) = base();
        let e = PowerControlProblem::new(g, n, vec![0.0], lo, hi, q, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().starts_with("w"));
        let (g, n, w2, lo, _, q) = base();
        let e = PowerControlProblem::new(g, n, w2, lo, vec![1e-4], q, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("p_max_watts[0]"));
        let (g, n, _, lo, hi, q) = base();
        let e = PowerControlProblem::new(g, n, w, lo, hi, q, 1.5, 1.0).unwrap_err();
        assert!(e.to_string().contains("rate_a"));
    }

    #[test]
    fn json_roundtrip_and_field_diagnostics() {
        let p = example1();
        let again = PowerControlProblem::from_json_str(&p.to_json_string()).unwrap();
        assert_eq!(p, again);
        let missing = r#"{"G": [[1.0]], "w": [1.0], "p_max_watts": [1.0]}"#;
        let e = PowerControlProblem::from_json_str(missing).unwrap_err();
        assert!(e.to_string().contains("n_watts"), "{e}");
        assert!(e.to_string().contains("line"), "{e}");
    }

    #[test]
    fn muted_and_rescaled() {
        let p = two_link();
        assert_eq!(p.muted_links(&[1.5e-12, 1e-3]), vec![0]);
        let q = p.rescaled(10.0, 1e3);
        let a = p.sinr(&[1e-3, 5e-4]).unwrap();
        let b = q.sinr(&[1.0, 0.5]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }
}
