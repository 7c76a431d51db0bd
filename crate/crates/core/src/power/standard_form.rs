//! The auxiliary-variable GP surrogate of the weighted-sum-rate problem.
//!
//! Variables are `p_1..p_N`, `s_1..s_N` (SINR surrogates) and `r`. The GP
//! minimizes `1/r` subject to
//!
//! * `r / ĝ(s) ≤ 1` with `ĝ` the condensed monomial,
//! * `s_i (n_i + Σ_{j≠i} p_j G_ji) / (p_i G_ii) ≤ 1`,
//! * `γ_i,min / s_i ≤ 1` where a floor is set,
//! * `p_i,min / p_i ≤ 1` and `p_i / p_i,max ≤ 1`.

use crate::gp::GpProblem;
use crate::posy::{Monomial, Posynomial, VarId};
use crate::scalar::Real;

use super::condense::CondensedMonomial;
use super::problem::PowerControlProblem;

/// Relative margin under the smallest attainable SINR used for the
/// auxiliary floors.
const AUX_FLOOR_MARGIN: f64 = 1e-3;

/// Variable layout of the standard-form GP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub links: usize,
}

impl Layout {
    pub fn p(&self, i: usize) -> VarId {
        VarId(i)
    }

    pub fn s(&self, i: usize) -> VarId {
        VarId(self.links + i)
    }

    pub fn r(&self) -> VarId {
        VarId(2 * self.links)
    }

    pub fn var_count(&self) -> usize {
        2 * self.links + 1
    }

    pub fn s_ids(&self) -> Vec<VarId> {
        (0..self.links).map(|i| self.s(i)).collect()
    }

    /// Packs `(p, s, r)` into a GP point.
    pub fn pack<T: Real>(&self, p: &[T], s: &[T], r: T) -> Vec<T> {
        let mut x = Vec::with_capacity(self.var_count());
        x.extend_from_slice(p);
        x.extend_from_slice(s);
        x.push(r);
        x
    }
}

/// Lower floors on `s` that no feasible power vector can reach down to.
/// Adding them leaves the optimum unchanged but keeps every auxiliary
/// variable bounded when its condensed exponent is (near) zero.
pub fn aux_floors<T: Real>(prob: &PowerControlProblem<T>) -> Vec<T> {
    (0..prob.links())
        .map(|i| prob.sinr_lower_bound(i) * T::lit(AUX_FLOOR_MARGIN))
        .collect()
}

pub fn build_standard_form<T: Real>(
    prob: &PowerControlProblem<T>,
    condensed: &CondensedMonomial<T>,
) -> GpProblem<T> {
    build_with_floors(prob, condensed, None)
}

/// As [`build_standard_form`], with `s_i ≥ max(γ_i,min, floors_i)` rows for
/// every link when floors are given.
pub fn build_with_floors<T: Real>(
    prob: &PowerControlProblem<T>,
    condensed: &CondensedMonomial<T>,
    floors: Option<&[T]>,
) -> GpProblem<T> {
    let n = prob.links();
    let lay = Layout { links: n };
    let mono = |c: T, e: Vec<(VarId, T)>| Monomial::new(c, e).expect("validated problem data");
    let one = T::one();

    let objective: Posynomial<T> = mono(one, vec![(lay.r(), -one)]).into();
    let mut rows: Vec<Posynomial<T>> = Vec::with_capacity(1 + 4 * n);

    let ghat = condensed
        .to_monomial(&lay.s_ids())
        .expect("condensation has positive coefficient");
    rows.push(Monomial::var(lay.r()).mul(&ghat.recip()).into());

    for i in 0..n {
        let gii = prob.gain(i, i);
        let mut terms = vec![mono(
            prob.noise()[i] / gii,
            vec![(lay.s(i), one), (lay.p(i), -one)],
        )];
        for j in (0..n).filter(|&j| j != i) {
            terms.push(mono(
                prob.gain(j, i) / gii,
                vec![(lay.s(i), one), (lay.p(j), one), (lay.p(i), -one)],
            ));
        }
        rows.push(Posynomial::new(terms).expect("non-empty"));
    }
    for i in 0..n {
        let floor = match floors {
            Some(f) => prob.gamma_min()[i].max(f[i]),
            None => prob.gamma_min()[i],
        };
        if floor > T::zero() {
            rows.push(mono(floor, vec![(lay.s(i), -one)]).into());
        }
    }
    for i in 0..n {
        rows.push(mono(prob.p_min()[i], vec![(lay.p(i), -one)]).into());
    }
    for i in 0..n {
        rows.push(mono(prob.p_max()[i].recip(), vec![(lay.p(i), one)]).into());
    }
    GpProblem::new(objective, rows, vec![], lay.var_count()).expect("layout covers every id")
}
