use thiserror::Error;

use crate::gp::{solve_from, GpError, GpProblem, SolveStatus, SolverOptions};
use crate::posy::{Monomial, Posynomial, VarId};
use crate::scalar::Real;

use super::problem::{PowerControlProblem, ProblemError};
use super::sca::check_feasible;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    /// Smallest common SINR shortfall factor the QoS GP could reach.
    #[error("QoS floors cannot be met jointly: best common slack {slack}")]
    Infeasible { slack: f64 },
    #[error("QoS feasibility GP ended with status {0:?}")]
    Solver(SolveStatus),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// A power vector meeting the bounds and every SINR floor.
pub fn feasible_init<T: Real>(prob: &PowerControlProblem<T>, opts: &SolverOptions<T>) -> Result<Vec<T>, InitError> {
    feasible_init_with_hint(prob, None, opts)
}

/// As [`feasible_init`], but a feasible `hint` is returned unchanged.
pub fn feasible_init_with_hint<T: Real>(
    prob: &PowerControlProblem<T>,
    hint: Option<&[T]>,
    opts: &SolverOptions<T>,
) -> Result<Vec<T>, InitError> {
    if let Some(h) = hint {
        if check_feasible(prob, h, opts.feasibility_tol).is_ok() {
            return Ok(h.to_vec());
        }
    }
    let p_max = prob.p_max().to_vec();
    if !prob.has_qos() || check_feasible(prob, &p_max, T::zero()).is_ok() {
        return Ok(p_max);
    }
    let (p, slack) = min_common_slack(prob, opts)?;
    if slack > T::one() + opts.feasibility_tol {
        return Err(InitError::Infeasible { slack: slack.as_f64() });
    }
    Ok(p)
}

/// Solves `min t` s.t. `γ_i(p) ≥ γ_i,min / t` and the power bounds.
/// Returns the powers and `t*`.
pub fn min_common_slack<T: Real>(
    prob: &PowerControlProblem<T>,
    opts: &SolverOptions<T>,
) -> Result<(Vec<T>, T), InitError> {
    let n = prob.links();
    let t = VarId(n);
    let one = T::one();
    let mono = |c: T, e: Vec<(VarId, T)>| Monomial::new(c, e).expect("validated problem data");

    let mut rows = Vec::new();
    for i in 0..n {
        let g = prob.gamma_min()[i];
        if g <= T::zero() {
            continue;
        }
        let gii = prob.gain(i, i);
        let mut terms = vec![mono(
            g * prob.noise()[i] / gii,
            vec![(VarId(i), -one), (t, -one)],
        )];
        for j in (0..n).filter(|&j| j != i) {
            terms.push(mono(
                g * prob.gain(j, i) / gii,
                vec![(VarId(j), one), (VarId(i), -one), (t, -one)],
            ));
        }
        rows.push(Posynomial::new(terms).expect("non-empty"));
    }
    for i in 0..n {
        rows.push(mono(prob.p_min()[i], vec![(VarId(i), -one)]).into());
        rows.push(mono(prob.p_max()[i].recip(), vec![(VarId(i), one)]).into());
    }
    let gp = GpProblem::new(mono(one, vec![(t, one)]).into(), rows, vec![], n + 1)?;

    let mut x0: Vec<T> = (0..n).map(|i| (prob.p_min()[i] * prob.p_max()[i]).sqrt()).collect();
    let s = prob.sinr(&x0)?;
    let worst = s
        .iter()
        .zip(prob.gamma_min())
        .fold(one, |acc, (&si, &g)| acc.max(g / si));
    x0.push(worst * T::lit(2.0));

    let sol = solve_from(&gp, &x0, opts)?;
    if sol.status != SolveStatus::Optimal {
        return Err(InitError::Solver(sol.status));
    }
    let p = sol.x[..n]
        .iter()
        .enumerate()
        .map(|(i, &v)| v.max(prob.p_min()[i]).min(prob.p_max()[i]))
        .collect();
    Ok((p, sol.x[n]))
}
