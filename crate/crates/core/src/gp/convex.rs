//! Log-domain form of a geometric program.
//!
//! With `y = ln x`, a monomial `c·Π x_k^{d_k}` becomes the affine function
//! `ln c + d·y` and a posynomial becomes the log-sum-exp of its terms' affine
//! functions, which is convex.

use crate::posy::{Monomial, Posynomial};
use crate::scalar::{log_sum_exp, Real};

use super::linalg::SquareMatrix;
use super::problem::GpProblem;

/// `offset + Σ coeffs[k].1 · y[vars[coeffs[k].0]]` with local indices.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineTerm<T> {
    pub offset: T,
    /// (local index into `LogSumExp::vars`, coefficient)
    pub coeffs: Vec<(usize, T)>,
}

/// `ln Σ_k exp(a_k·y + b_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSumExp<T> {
    /// Global variable indices touched by any term, sorted.
    pub vars: Vec<usize>,
    pub terms: Vec<AffineTerm<T>>,
}

/// Value, gradient and Hessian of a [`LogSumExp`] over its local variables.
#[derive(Clone, Debug)]
pub struct LseEval<T> {
    pub value: T,
    pub grad: Vec<T>,
    /// Row-major `vars.len()²`.
    pub hess: Vec<T>,
}

impl<T: Real> LogSumExp<T> {
    pub fn from_posynomial(p: &Posynomial<T>) -> Self {
        let mut vars: Vec<usize> = p
            .terms()
            .iter()
            .flat_map(|t| t.exponents().iter().map(|(v, _)| v.0))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        let local = |g: usize| vars.binary_search(&g).unwrap();
        let terms = p
            .terms()
            .iter()
            .map(|t| AffineTerm {
                offset: t.coefficient().ln(),
                coeffs: t.exponents().iter().map(|&(v, d)| (local(v.0), d)).collect(),
            })
            .collect();
        Self { vars, terms }
    }

    fn term_values(&self, y: &[T]) -> Vec<T> {
        self.terms
            .iter()
            .map(|t| {
                t.coeffs
                    .iter()
                    .fold(t.offset, |acc, &(l, d)| acc + d * y[self.vars[l]])
            })
            .collect()
    }

    pub fn value(&self, y: &[T]) -> T {
        log_sum_exp(&self.term_values(y))
    }

    /// Dense gradient over all variables (length `y.len()`).
    pub fn gradient(&self, y: &[T]) -> Vec<T> {
        let e = self.eval(y, false);
        let mut g = vec![T::zero(); y.len()];
        for (l, &v) in self.vars.iter().enumerate() {
            g[v] = e.grad[l];
        }
        g
    }

    /// Value and local derivatives; the Hessian is left empty unless asked.
    pub fn eval(&self, y: &[T], with_hessian: bool) -> LseEval<T> {
        let vals = self.term_values(y);
        let value = log_sum_exp(&vals);
        let k = self.vars.len();
        let mut grad = vec![T::zero(); k];
        let mut hess = if with_hessian {
            vec![T::zero(); k * k]
        } else {
            Vec::new()
        };
        for (t, &v) in self.terms.iter().zip(&vals) {
            let w = (v - value).exp();
            if w == T::zero() {
                continue;
            }
            for &(l, d) in &t.coeffs {
                grad[l] += w * d;
            }
            if with_hessian {
                for &(a, da) in &t.coeffs {
                    for &(b, db) in &t.coeffs {
                        hess[a * k + b] += w * da * db;
                    }
                }
            }
        }
        if with_hessian {
            for a in 0..k {
                for b in 0..k {
                    hess[a * k + b] -= grad[a] * grad[b];
                }
            }
        }
        LseEval { value, grad, hess }
    }

    /// Adds `hs·∇²f + gs·∇f∇fᵀ` into a global matrix and `gw·∇f` into a
    /// global vector.
    pub(crate) fn scatter(
        &self,
        e: &LseEval<T>,
        hs: T,
        gs: T,
        gw: T,
        h: &mut SquareMatrix<T>,
        g: &mut [T],
    ) {
        let k = self.vars.len();
        for a in 0..k {
            let va = self.vars[a];
            g[va] += gw * e.grad[a];
            for b in 0..k {
                let vb = self.vars[b];
                let mut v = gs * e.grad[a] * e.grad[b];
                if !e.hess.is_empty() {
                    v += hs * e.hess[a * k + b];
                }
                h.add_to(va, vb, v);
            }
        }
    }
}

/// `Σ_k coeffs_k y_k = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquality<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Real> LinearEquality<T> {
    /// `m(x) = 1` ⇔ `ln c + d·y = 0`.
    pub fn from_monomial(m: &Monomial<T>) -> Self {
        Self {
            coeffs: m.exponents().iter().map(|&(v, d)| (v.0, d)).collect(),
            rhs: -m.coefficient().ln(),
        }
    }

    pub fn residual(&self, y: &[T]) -> T {
        self.coeffs
            .iter()
            .fold(-self.rhs, |acc, &(k, d)| acc + d * y[k])
    }
}

/// Convex program in `y = ln x`: minimize `objective(y)` s.t.
/// `inequalities_i(y) ≤ 0` and the linear equalities.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexForm<T> {
    pub objective: LogSumExp<T>,
    pub inequalities: Vec<LogSumExp<T>>,
    pub equalities: Vec<LinearEquality<T>>,
    pub var_count: usize,
}

pub fn to_convex<T: Real>(gp: &GpProblem<T>) -> ConvexForm<T> {
    ConvexForm {
        objective: LogSumExp::from_posynomial(gp.objective()),
        inequalities: gp
            .ineq_constraints()
            .iter()
            .map(LogSumExp::from_posynomial)
            .collect(),
        equalities: gp
            .mono_eq_constraints()
            .iter()
            .map(LinearEquality::from_monomial)
            .collect(),
        var_count: gp.var_count(),
    }
}
