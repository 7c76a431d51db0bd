use thiserror::Error;

use crate::gp::{solve_from, GpError, SolveStatus, SolverOptions};
use crate::scalar::{dist2, Real};

use super::condense::{condense_proposed, CondenseError};
use super::problem::{PowerControlProblem, ProblemError};
use super::standard_form::{aux_floors, build_with_floors, Layout};

/// Pull-in factor used to build a strictly interior GP start.
const INTERIOR_PULL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ScaOptions<T> {
    /// Stop once `‖p_new − p_old‖₂ < eps` (watts).
    pub eps: T,
    pub max_iterations: usize,
    pub solver: SolverOptions<T>,
}

impl<T: Real> Default for ScaOptions<T> {
    fn default() -> Self {
        Self {
            eps: T::lit(1e-6),
            max_iterations: 50,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Power step fell below `eps`.
    Tolerance,
    /// The surrogate optimum no longer improved the true objective.
    Stalled,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaIterate<T> {
    pub iteration: usize,
    pub p: Vec<T>,
    pub weighted_sum_rate: T,
    /// `‖p_k − p_{k−1}‖₂`, zero for the initial point.
    pub step_norm: T,
    /// KKT residual of the GP solved to produce this iterate.
    pub gp_kkt: T,
    pub gp_newton_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaReport<T> {
    pub p_star: Vec<T>,
    /// Initial point first, then every accepted iterate.
    pub trajectory: Vec<ScaIterate<T>>,
    pub converged: bool,
    pub termination: Termination,
    /// Number of GPs solved.
    pub iterations: usize,
}

impl<T: Real> ScaReport<T> {
    pub fn weighted_sum_rate(&self) -> T {
        self.trajectory
            .last()
            .map(|it| it.weighted_sum_rate)
            .unwrap_or_else(T::nan)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaError<T: Real> {
    #[error("initial power vector is infeasible: {0}")]
    InfeasibleInitial(String),
    #[error("GP solve failed with status {status:?} after {} iterations", partial.iterations)]
    SolverFailure {
        status: SolveStatus,
        partial: Box<ScaReport<T>>,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Condense(#[from] CondenseError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

/// Checks bounds and QoS floors at `p`, with relative slack `tol`.
pub fn check_feasible<T: Real>(prob: &PowerControlProblem<T>, p: &[T], tol: T) -> Result<(), String> {
    if p.len() != prob.links() {
        return Err(format!("expected {} powers, got {}", prob.links(), p.len()));
    }
    let one = T::one();
    for i in 0..p.len() {
        if !(p[i] >= prob.p_min()[i] * (one - tol)) || !(p[i] <= prob.p_max()[i] * (one + tol)) {
            return Err(format!(
                "p[{i}] = {} outside [{}, {}]",
                p[i],
                prob.p_min()[i],
                prob.p_max()[i]
            ));
        }
    }
    let g = prob.sinr(p).map_err(|e| e.to_string())?;
    for (i, (&gi, &lo)) in g.iter().zip(prob.gamma_min()).enumerate() {
        if gi * (one + tol) < lo {
            return Err(format!("SINR of link {i} is {gi}, floor is {lo}"));
        }
    }
    Ok(())
}

fn clamp_box<T: Real>(prob: &PowerControlProblem<T>, p: &[T], pull: T) -> Vec<T> {
    p.iter()
        .enumerate()
        .map(|(i, &v)| {
            let lo = prob.p_min()[i];
            let hi = prob.p_max()[i];
            if hi > lo {
                v.max(lo * (T::one() + pull)).min(hi * (T::one() - pull)).max(lo)
            } else {
                lo
            }
        })
        .collect()
}

/// Successive condensation: expand at the current SINRs, solve the GP,
/// move to its power vector, repeat until the power step is below `eps`.
pub fn sca_solve<T: Real>(
    prob: &PowerControlProblem<T>,
    p_init: &[T],
    opts: &ScaOptions<T>,
) -> Result<ScaReport<T>, ScaError<T>> {
    check_feasible(prob, p_init, opts.solver.feasibility_tol).map_err(ScaError::InfeasibleInitial)?;
    let n = prob.links();
    let lay = Layout { links: n };
    let floors = aux_floors(prob);
    let pull = T::lit(INTERIOR_PULL);

    let mut p = clamp_box(prob, p_init, T::zero());
    let mut wsr = prob.weighted_sum_rate(&p)?;
    let mut report = ScaReport {
        p_star: p.clone(),
        trajectory: vec![ScaIterate {
            iteration: 0,
            p: p.clone(),
            weighted_sum_rate: wsr,
            step_norm: T::zero(),
            gp_kkt: T::zero(),
            gp_newton_steps: 0,
        }],
        converged: false,
        termination: Termination::IterationCap,
        iterations: 0,
    };

    for k in 1..=opts.max_iterations {
        let s0 = prob.sinr(&p)?;
        let cond = condense_proposed(&s0, prob.weights())?;
        let gp = build_with_floors(prob, &cond, Some(&floors));

        let p_in = clamp_box(prob, &p, pull);
        let s_in: Vec<T> = prob
            .sinr(&p_in)?
            .iter()
            .zip(&floors)
            .map(|(&g, &f)| (g * (T::one() - pull)).max(f * (T::one() + pull)))
            .collect();
        let r_in = cond.eval(&s_in) * (T::one() - pull);
        let x0 = lay.pack(&p_in, &s_in, r_in);

        let sol = solve_from(&gp, &x0, &opts.solver)?;
        report.iterations = k;
        if sol.status != SolveStatus::Optimal {
            return Err(ScaError::SolverFailure {
                status: sol.status,
                partial: Box::new(report),
            });
        }
        let p_new = clamp_box(prob, &sol.x[..n], T::zero());
        let wsr_new = prob.weighted_sum_rate(&p_new)?;
        let step = dist2(&p_new, &p);
        if wsr_new < wsr {
            // keep the better point; a sub-eps step still counts as convergence
            report.converged = true;
            report.termination = if step < opts.eps {
                Termination::Tolerance
            } else {
                Termination::Stalled
            };
            break;
        }
        report.trajectory.push(ScaIterate {
            iteration: k,
            p: p_new.clone(),
            weighted_sum_rate: wsr_new,
            step_norm: step,
            gp_kkt: sol.kkt_residual,
            gp_newton_steps: sol.iterations,
        });
        p = p_new;
        wsr = wsr_new;
        report.p_star = p.clone();
        if step < opts.eps {
            report.converged = true;
            report.termination = Termination::Tolerance;
            break;
        }
    }
    Ok(report)
}
