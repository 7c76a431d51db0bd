//! Monomial condensation of `g(s) = Π (1 + s_i)^{w_i}`.
//!
//! Two operators are provided. [`condense_proposed`] works factor by factor:
//! each `1 + s_i` is replaced by the monomial `c_i s_i^{d_i}` that matches its
//! value and slope at `s_{i0}`, so the whole condensation is `N + 1` numbers.
//! [`condense_agm`] is the classic arithmetic-geometric-mean bound applied to
//! an explicit posynomial, which for `g` requires expanding all `2^N` terms.

use thiserror::Error;

use crate::posy::{Monomial, PosyError, Posynomial, VarId};
use crate::scalar::{log_sum_exp, Real};

/// Expansion points below this are raised to it before condensing.
pub const S0_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CondenseError {
    #[error("expansion point entry {index} must be positive, got {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("expansion point has length {got}, weights have length {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Posy(#[from] PosyError),
}

/// `ĝ(s) = c · Π s_i^{d_i}` with `d_i` already multiplied by the weight.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensedMonomial<T> {
    c: T,
    d: Vec<T>,
}

impl<T: Real> CondensedMonomial<T> {
    pub fn c(&self) -> T {
        self.c
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    /// Number of scalars the condensation stores (`N + 1`).
    pub fn stored_quantities(&self) -> usize {
        self.d.len() + 1
    }

    pub fn eval(&self, s: &[T]) -> T {
        self.log_eval(s).exp()
    }

    pub fn log_eval(&self, s: &[T]) -> T {
        self.d
            .iter()
            .zip(s)
            .fold(self.c.ln(), |acc, (&d, &si)| acc + d * si.ln())
    }

    pub fn gradient(&self, s: &[T]) -> Vec<T> {
        let v = self.eval(s);
        self.d.iter().zip(s).map(|(&d, &si)| v * d / si).collect()
    }

    /// The same monomial over the given variable ids.
    pub fn to_monomial(&self, ids: &[VarId]) -> Result<Monomial<T>, PosyError> {
        Monomial::new(self.c, ids.iter().copied().zip(self.d.iter().copied()))
    }
}

/// Per-factor closed form: `d = s0/(1+s0)`, `c = (1+s0)·s0^{-d}`.
pub fn factor_condensation<T: Real>(s0: T) -> (T, T) {
    let d = s0 / (T::one() + s0);
    let c = (T::one() + s0) * s0.powf(-d);
    (c, d)
}

pub fn condense_proposed<T: Real>(s0: &[T], w: &[T]) -> Result<CondensedMonomial<T>, CondenseError> {
    if s0.len() != w.len() {
        return Err(CondenseError::Dimension {
            expected: w.len(),
            got: s0.len(),
        });
    }
    let mut ln_c = T::zero();
    let mut d = Vec::with_capacity(s0.len());
    for (i, (&s, &wi)) in s0.iter().zip(w).enumerate() {
        if !(s > T::zero()) || !s.is_finite() {
            return Err(CondenseError::NonPositive {
                index: i,
                value: s.as_f64(),
            });
        }
        let s = s.max(T::lit(S0_FLOOR));
        let di = s / (T::one() + s);
        ln_c += wi * (s.ln_1p() - di * s.ln());
        d.push(wi * di);
    }
    Ok(CondensedMonomial { c: ln_c.exp(), d })
}

/// `g(s) = Π (1 + s_i)^{w_i}`.
pub fn aux_objective<T: Real>(s: &[T], w: &[T]) -> T {
    s.iter()
        .zip(w)
        .map(|(&si, &wi)| wi * si.ln_1p())
        .sum::<T>()
        .exp()
}

/// AGM weights `α_k = u_k(x0) / g(x0)` of the posynomial's terms.
pub fn agm_weights<T: Real>(g: &Posynomial<T>, x0: &[T]) -> Result<Vec<T>, PosyError> {
    let logs = g
        .terms()
        .iter()
        .map(|u| u.log_eval(x0))
        .collect::<Result<Vec<_>, _>>()?;
    let total = log_sum_exp(&logs);
    Ok(logs.iter().map(|&l| (l - total).exp()).collect())
}

/// `ĝ(x) = Π (u_k(x)/α_k)^{α_k}`; terms with `α_k = 0` contribute nothing.
pub fn condense_agm<T: Real>(g: &Posynomial<T>, x0: &[T]) -> Result<Monomial<T>, PosyError> {
    let alpha = agm_weights(g, x0)?;
    let mut ln_c = T::zero();
    let mut exps: Vec<(VarId, T)> = Vec::new();
    for (u, &a) in g.terms().iter().zip(&alpha) {
        if a == T::zero() {
            continue;
        }
        ln_c += a * (u.coefficient().ln() - a.ln());
        exps.extend(u.exponents().iter().map(|&(v, d)| (v, a * d)));
    }
    Monomial::new(ln_c.exp(), exps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posy::one_plus;

    #[test]
    fn single_factor_at_one() {
        let c = condense_proposed(&[1.0_f64], &[1.0]).unwrap();
        assert_eq!(c.d(), &[0.5]);
        assert!((c.c() - 2.0).abs() < 1e-15);
        for s in [0.25, 1.0, 4.0] {
            assert!((c.eval(&[s]) - 2.0 * f64::sqrt(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_factor_at_three() {
        let c = condense_proposed(&[3.0_f64], &[1.0]).unwrap();
        assert_eq!(c.d(), &[0.75]);
        assert!((c.c() - 4.0 * 3f64.powf(-0.75)).abs() < 1e-14);
    }

    #[test]
    fn tangent_at_expansion_point() {
        let c = condense_proposed(&[1.0_f64, 1.0], &[0.5, 0.5]).unwrap();
        assert!((c.eval(&[1.0, 1.0]) - 2.0).abs() < 1e-15);
        assert!((aux_objective(&[1.0_f64, 1.0], &[0.5, 0.5]) - 2.0).abs() < 1e-15);
        assert_eq!(c.stored_quantities(), 3);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(matches!(
            condense_proposed(&[0.0_f64], &[1.0]),
            Err(CondenseError::NonPositive { index: 0, .. })
        ));
        assert!(matches!(
            condense_proposed(&[1.0_f64, -1.0], &[1.0, 1.0]),
            Err(CondenseError::NonPositive { index: 1, .. })
        ));
        assert!(matches!(
            condense_proposed(&[1.0_f64], &[1.0, 1.0]),
            Err(CondenseError::Dimension { .. })
        ));
    }

    #[test]
    fn tiny_points_are_floored() {
        let c = condense_proposed(&[1e-300_f64], &[1.0]).unwrap();
        let (cf, df) = factor_condensation(S0_FLOOR);
        assert_eq!(c.d()[0], df);
        assert!((c.c() - cf).abs() < 1e-15);
    }

    #[test]
    fn agm_on_binomial() {
        let g = one_plus::<f64>(VarId(0));
        let alpha = agm_weights(&g, &[1.0]).unwrap();
        assert_eq!(alpha, vec![0.5, 0.5]);
        let m = condense_agm(&g, &[1.0]).unwrap();
        assert!((m.coefficient() - 2.0).abs() < 1e-15);
        assert_eq!(m.exponent(VarId(0)), 0.5);
    }

    #[test]
    fn agm_matches_factor_form_at_three() {
        let g = one_plus::<f64>(VarId(0));
        let m = condense_agm(&g, &[3.0]).unwrap();
        let c = condense_proposed(&[3.0], &[1.0]).unwrap();
        for k in 0..100 {
            let s = 0.01 * 1.1f64.powi(k);
            let a = m.eval(&[s]).unwrap();
            let b = c.eval(&[s]);
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn agm_on_expanded_pair_is_tangent_and_below() {
        let g = Posynomial::expand_product(
            &[one_plus::<f64>(VarId(0)), one_plus(VarId(1))],
            crate::posy::DEFAULT_TERM_CAP,
        )
        .unwrap();
        let m = condense_agm(&g, &[1.0, 1.0]).unwrap();
        assert!((m.eval(&[1.0, 1.0]).unwrap() - 4.0).abs() < 1e-14);
        let mut x = 0.3_f64;
        for _ in 0..1000 {
            // deterministic scatter over (1e-3, 1e3)²
            x = (x * 7.31 + 0.137).fract();
            let y = (x * 3.77 + 0.511).fract();
            let s = [10f64.powf(6.0 * x - 3.0), 10f64.powf(6.0 * y - 3.0)];
            assert!(m.eval(&s).unwrap() <= g.eval(&s).unwrap() * (1.0 + 1e-12));
        }
    }
}
