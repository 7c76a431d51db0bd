use thiserror::Error;

use crate::posy::{Monomial, Posynomial};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("problem needs at least one variable")]
    NoVariables,
    #[error("{what} references variable {index} but var_count is {var_count}")]
    VariableOutOfRange {
        what: String,
        index: usize,
        var_count: usize,
    },
    #[error("initial point has length {got}, expected {expected}")]
    BadInitialLength { got: usize, expected: usize },
    #[error("initial point entry {0} is not strictly positive and finite")]
    BadInitialPoint(usize),
    #[error("invalid solver options: {0}")]
    BadOptions(&'static str),
}

/// Standard-form geometric program:
/// minimize `objective(x)` s.t. `p_i(x) ≤ 1`, `m_j(x) = 1`, `x > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GpProblem<T> {
    objective: Posynomial<T>,
    ineq_constraints: Vec<Posynomial<T>>,
    mono_eq_constraints: Vec<Monomial<T>>,
    var_count: usize,
}

impl<T: Real> GpProblem<T> {
    pub fn new(
        objective: Posynomial<T>,
        ineq_constraints: Vec<Posynomial<T>>,
        mono_eq_constraints: Vec<Monomial<T>>,
        var_count: usize,
    ) -> Result<Self, GpError> {
        if var_count == 0 {
            return Err(GpError::NoVariables);
        }
        let check = |what: String, span: usize| {
            if span > var_count {
                Err(GpError::VariableOutOfRange {
                    what,
                    index: span - 1,
                    var_count,
                })
            } else {
                Ok(())
            }
        };
        check("objective".into(), objective.var_span())?;
        for (i, p) in ineq_constraints.iter().enumerate() {
            check(format!("inequality {i}"), p.var_span())?;
        }
        for (i, m) in mono_eq_constraints.iter().enumerate() {
            check(format!("equality {i}"), m.var_span())?;
        }
        Ok(Self {
            objective,
            ineq_constraints,
            mono_eq_constraints,
            var_count,
        })
    }

    pub fn objective(&self) -> &Posynomial<T> {
        &self.objective
    }

    pub fn ineq_constraints(&self) -> &[Posynomial<T>] {
        &self.ineq_constraints
    }

    pub fn mono_eq_constraints(&self) -> &[Monomial<T>] {
        &self.mono_eq_constraints
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    /// Adds an extra `p(x) ≤ 1` row.
    pub fn with_inequality(mut self, p: Posynomial<T>) -> Result<Self, GpError> {
        if p.var_span() > self.var_count {
            return Err(GpError::VariableOutOfRange {
                what: "appended inequality".into(),
                index: p.var_span() - 1,
                var_count: self.var_count,
            });
        }
        self.ineq_constraints.push(p);
        Ok(self)
    }

    /// Largest `p_i(x)` over the inequality rows (1 when there are none).
    pub fn max_constraint_value(&self, x: &[T]) -> Result<T, crate::posy::PosyError> {
        let mut worst = T::zero();
        for p in &self.ineq_constraints {
            worst = worst.max(p.eval(x)?);
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions<T> {
    pub feasibility_tol: T,
    pub kkt_tol: T,
    /// Cap on Newton steps, counted separately for each phase.
    pub max_iterations: usize,
    /// Initial barrier weight.
    pub t0: T,
    /// Barrier weight growth factor per centering step.
    pub mu: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            feasibility_tol: T::tol(1e-8),
            kkt_tol: T::tol(1e-8),
            max_iterations: 200,
            t0: T::one(),
            mu: T::lit(20.0),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<(), GpError> {
        if !(self.feasibility_tol > T::zero()) || !(self.kkt_tol > T::zero()) {
            return Err(GpError::BadOptions("tolerances must be positive"));
        }
        if !(self.mu > T::one()) {
            return Err(GpError::BadOptions("barrier growth factor must exceed 1"));
        }
        if !(self.t0 > T::zero()) {
            return Err(GpError::BadOptions("initial barrier weight must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(GpError::BadOptions("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpSolution<T> {
    pub x: Vec<T>,
    pub objective_value: T,
    pub status: SolveStatus,
    pub kkt_residual: T,
    /// Newton steps taken, both phases included.
    pub iterations: usize,
    /// Inequality multipliers (log-domain), one per row.
    pub multipliers: Vec<T>,
    /// Smallest achievable `max_i p_i(x)` found by phase 1, when it ran.
    pub phase1_slack: Option<T>,
}

impl<T: Real> GpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
