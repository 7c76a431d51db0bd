//! Brute-force global references for small instances: an exhaustive
//! linear grid over the power box and enumeration of the `{p_min, p_max}`
//! vertices.

use rayon::prelude::*;
use thiserror::Error;

use crate::power::PowerControlProblem;
use crate::scalar::Real;

pub const GRID_MAX_LINKS: usize = 6;
pub const VERTEX_MAX_LINKS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} supports at most {cap} links, problem has {links}")]
    TooLarge { what: &'static str, cap: usize, links: usize },
    #[error("grid needs at least 2 points per dimension, got {0}")]
    Resolution(usize),
    #[error("no searched point satisfies the SINR floors")]
    NoFeasiblePoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Effort {
    Grid { points_per_dim: usize },
    Vertices,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub p_best: Vec<T>,
    pub objective: T,
    pub effort: Effort,
    /// Number of points evaluated.
    pub evaluations: u64,
}

/// Points per chunk handed to one rayon task.
const CHUNK: u64 = 1 << 14;

fn search<T: Real>(
    prob: &PowerControlProblem<T>,
    levels: &[Vec<T>],
    effort: Effort,
) -> Result<OracleResult<T>, OracleError> {
    let n = prob.links();
    let base = levels[0].len() as u64;
    let total = base.pow(n as u32);
    let chunks = total.div_ceil(CHUNK);
    let decode = |mut idx: u64, p: &mut [T]| {
        for (i, slot) in p.iter_mut().enumerate() {
            *slot = levels[i][(idx % base) as usize];
            idx /= base;
        }
    };
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut p = vec![T::zero(); n];
            let mut best: Option<(T, u64)> = None;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode(idx, &mut p);
                let Some(v) = objective_if_feasible(prob, &p) else {
                    continue;
                };
                if best.map_or(true, |(b, _)| v > b) {
                    best = Some((v, idx));
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );
    let (objective, idx) = best.ok_or(OracleError::NoFeasiblePoint)?;
    let mut p_best = vec![T::zero(); n];
    decode(idx, &mut p_best);
    Ok(OracleResult {
        p_best,
        objective,
        effort,
        evaluations: total,
    })
}

fn objective_if_feasible<T: Real>(prob: &PowerControlProblem<T>, p: &[T]) -> Option<T> {
    let n = p.len();
    let mut total = T::zero();
    for i in 0..n {
        let mut den = prob.noise()[i];
        for (j, &pj) in p.iter().enumerate() {
            if j != i {
                den += pj * prob.gain(j, i);
            }
        }
        let g = p[i] * prob.gain(i, i) / den;
        if g < prob.gamma_min()[i] {
            return None;
        }
        total += prob.weights()[i] * prob.rate_of(g);
    }
    Some(total)
}

/// Exhaustive search over a linear grid with `points_per_dim` levels per
/// link, both bounds included.
pub fn grid_search<T: Real>(
    prob: &PowerControlProblem<T>,
    points_per_dim: usize,
) -> Result<OracleResult<T>, OracleError> {
    let n = prob.links();
    if n > GRID_MAX_LINKS {
        return Err(OracleError::TooLarge {
            what: "grid search",
            cap: GRID_MAX_LINKS,
            links: n,
        });
    }
    if points_per_dim < 2 {
        return Err(OracleError::Resolution(points_per_dim));
    }
    let last = T::count(points_per_dim - 1);
    let levels: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let (lo, hi) = (prob.p_min()[i], prob.p_max()[i]);
            (0..points_per_dim)
                .map(|k| match k {
                    0 => lo,
                    k if k == points_per_dim - 1 => hi,
                    k => lo + (hi - lo) * T::count(k) / last,
                })
                .collect()
        })
        .collect();
    search(prob, &levels, Effort::Grid { points_per_dim })
}

/// Best allocation over `{p_min, p_max}^N`.
pub fn vertex_enumeration<T: Real>(prob: &PowerControlProblem<T>) -> Result<OracleResult<T>, OracleError> {
    let n = prob.links();
    if n > VERTEX_MAX_LINKS {
        return Err(OracleError::TooLarge {
            what: "vertex enumeration",
            cap: VERTEX_MAX_LINKS,
            links: n,
        });
    }
    let levels: Vec<Vec<T>> = (0..n).map(|i| vec![prob.p_min()[i], prob.p_max()[i]]).collect();
    search(prob, &levels, Effort::Vertices)
}
