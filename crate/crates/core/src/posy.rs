//! Monomials and posynomials over strictly positive variables.
//!
//! A [`Monomial`] is `c · Π x_k^{d_k}` with `c > 0`; a [`Posynomial`] is a
//! non-empty sum of monomials. Variables are addressed by dense [`VarId`]s so
//! that a point is just a slice indexed by id.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::{bit_key, Real};

/// Default cap on the number of terms a product may produce.
pub const DEFAULT_TERM_CAP: usize = 1 << 20;

/// Dense variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosyError {
    #[error("monomial coefficient must be positive and finite, got {0}")]
    BadCoefficient(f64),
    #[error("exponent of {0} is not finite")]
    BadExponent(VarId),
    #[error("variable {0} has no entry in the evaluation point")]
    MissingVariable(VarId),
    #[error("variable {var} must be strictly positive, got {value}")]
    NonPositive { var: VarId, value: f64 },
    #[error("a posynomial needs at least one term")]
    Empty,
    #[error("product would have {requested} terms, cap is {cap}")]
    TermCapExceeded { requested: u128, cap: usize },
}

/// Hands out consecutive variable ids and remembers their names.
#[derive(Clone, Debug, Default)]
pub struct VarRegistry {
    names: Vec<String>,
}

impl VarRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>) -> VarId {
        self.names.push(name.into());
        VarId(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: VarId) -> Option<&str> {
        self.names.get(id.0).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<T> {
    coefficient: T,
    // sorted by id, no zero exponents
    exponents: Vec<(VarId, T)>,
}

impl<T: Real> Monomial<T> {
    /// Builds a monomial, merging repeated ids and dropping zero exponents.
    pub fn new(
        coefficient: T,
        exponents: impl IntoIterator<Item = (VarId, T)>,
    ) -> Result<Self, PosyError> {
        if !(coefficient > T::zero()) || !coefficient.is_finite() {
            return Err(PosyError::BadCoefficient(coefficient.as_f64()));
        }
        let mut exps: Vec<(VarId, T)> = Vec::new();
        for (id, d) in exponents {
            if !d.is_finite() {
                return Err(PosyError::BadExponent(id));
            }
            exps.push((id, d));
        }
        Ok(Self {
            coefficient,
            exponents: canonical_exponents(exps),
        })
    }

    pub fn constant(c: T) -> Result<Self, PosyError> {
        Self::new(c, [])
    }

    /// The monomial `x_id`.
    pub fn var(id: VarId) -> Self {
        Self {
            coefficient: T::one(),
            exponents: vec![(id, T::one())],
        }
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    pub fn exponents(&self) -> &[(VarId, T)] {
        &self.exponents
    }

    pub fn exponent(&self, id: VarId) -> T {
        self.exponents
            .binary_search_by_key(&id, |&(v, _)| v)
            .map(|i| self.exponents[i].1)
            .unwrap_or_else(|_| T::zero())
    }

    /// Largest variable index referenced, plus one.
    pub fn var_span(&self) -> usize {
        self.exponents.last().map_or(0, |(v, _)| v.0 + 1)
    }

    /// `ln m(x)`, computed without forming the product.
    pub fn log_eval(&self, x: &[T]) -> Result<T, PosyError> {
        let mut acc = self.coefficient.ln();
        for &(id, d) in &self.exponents {
            let xi = *x.get(id.0).ok_or(PosyError::MissingVariable(id))?;
            if !(xi > T::zero()) {
                return Err(PosyError::NonPositive {
                    var: id,
                    value: xi.as_f64(),
                });
            }
            acc += d * xi.ln();
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &[T]) -> Result<T, PosyError> {
        let mut acc = self.coefficient;
        for &(id, d) in &self.exponents {
            let xi = *x.get(id.0).ok_or(PosyError::MissingVariable(id))?;
            if !(xi > T::zero()) {
                return Err(PosyError::NonPositive {
                    var: id,
                    value: xi.as_f64(),
                });
            }
            acc *= xi.powf(d);
        }
        Ok(acc)
    }

    /// Product of two monomials (always a monomial).
    pub fn mul(&self, other: &Self) -> Self {
        let mut exps = self.exponents.clone();
        exps.extend_from_slice(&other.exponents);
        Self {
            coefficient: self.coefficient * other.coefficient,
            exponents: canonical_exponents(exps),
        }
    }

    /// `m^k` for a real power `k`.
    pub fn powf(&self, k: T) -> Self {
        Self {
            coefficient: self.coefficient.powf(k),
            exponents: canonical_exponents(
                self.exponents.iter().map(|&(v, d)| (v, d * k)).collect(),
            ),
        }
    }

    pub fn recip(&self) -> Self {
        self.powf(-T::one())
    }

    pub fn scale(&self, k: T) -> Result<Self, PosyError> {
        Self::new(self.coefficient * k, self.exponents.iter().copied())
    }

    fn key(&self) -> Vec<(usize, (u64, i16, i8))> {
        self.exponents
            .iter()
            .map(|&(v, d)| (v.0, bit_key(d)))
            .collect()
    }

    /// Cast to another scalar type.
    pub fn cast<U: Real>(&self) -> Monomial<U> {
        Monomial {
            coefficient: U::lit(self.coefficient.as_f64()),
            exponents: self
                .exponents
                .iter()
                .map(|&(v, d)| (v, U::lit(d.as_f64())))
                .collect(),
        }
    }
}

fn canonical_exponents<T: Real>(mut exps: Vec<(VarId, T)>) -> Vec<(VarId, T)> {
    exps.sort_by_key(|&(v, _)| v);
    let mut out: Vec<(VarId, T)> = Vec::with_capacity(exps.len());
    for (v, d) in exps {
        match out.last_mut() {
            Some((last, acc)) if *last == v => *acc += d,
            _ => out.push((v, d)),
        }
    }
    out.retain(|&(_, d)| d != T::zero());
    out
}

impl<T: Real> fmt::Display for Monomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for (v, d) in &self.exponents {
            write!(f, "·{v}^{d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Posynomial<T> {
    terms: Vec<Monomial<T>>,
}

impl<T: Real> Posynomial<T> {
    /// Builds a posynomial and merges like terms.
    pub fn new(terms: Vec<Monomial<T>>) -> Result<Self, PosyError> {
        if terms.is_empty() {
            return Err(PosyError::Empty);
        }
        Ok(Self { terms }.canonical())
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Always false: the constructor rejects empty term lists.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn var_span(&self) -> usize {
        self.terms.iter().map(Monomial::var_span).max().unwrap_or(0)
    }

    /// Merges terms with identical exponent vectors, keeping first-seen order.
    pub fn canonical(self) -> Self {
        let mut index: HashMap<Vec<(usize, (u64, i16, i8))>, usize> = HashMap::new();
        let mut out: Vec<Monomial<T>> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            match index.get(&t.key()) {
                Some(&i) => out[i].coefficient += t.coefficient,
                None => {
                    index.insert(t.key(), out.len());
                    out.push(t);
                }
            }
        }
        Self { terms: out }
    }

    pub fn eval(&self, x: &[T]) -> Result<T, PosyError> {
        let mut acc = T::zero();
        for t in &self.terms {
            acc += t.eval(x)?;
        }
        Ok(acc)
    }

    /// `ln p(x)` via log-sum-exp of the term logs.
    pub fn log_eval(&self, x: &[T]) -> Result<T, PosyError> {
        let logs = self
            .terms
            .iter()
            .map(|t| t.log_eval(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(crate::scalar::log_sum_exp(&logs))
    }

    /// Distributed product, refusing results with more than `cap` terms.
    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self, PosyError> {
        let requested = self.terms.len() as u128 * other.terms.len() as u128;
        if requested > cap as u128 {
            return Err(PosyError::TermCapExceeded { requested, cap });
        }
        let mut terms = Vec::with_capacity(requested as usize);
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        Ok(Self { terms }.canonical())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PosyError> {
        self.mul_capped(other, DEFAULT_TERM_CAP)
    }

    /// Multiplies every term by a monomial.
    pub fn mul_monomial(&self, m: &Monomial<T>) -> Self {
        Self {
            terms: self.terms.iter().map(|t| t.mul(m)).collect(),
        }
        .canonical()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }.canonical()
    }

    /// Expands `Π factors` term by term. The unmerged term count is checked
    /// against `cap` before any work is done.
    pub fn expand_product(factors: &[Self], cap: usize) -> Result<Self, PosyError> {
        let (first, rest) = factors.split_first().ok_or(PosyError::Empty)?;
        let mut requested: u128 = 1;
        for f in factors {
            requested = requested.saturating_mul(f.terms.len() as u128);
        }
        if requested > cap as u128 {
            return Err(PosyError::TermCapExceeded { requested, cap });
        }
        rest.iter()
            .try_fold(first.clone(), |acc, f| acc.mul_capped(f, cap))
    }

    pub fn cast<U: Real>(&self) -> Posynomial<U> {
        Posynomial {
            terms: self.terms.iter().map(Monomial::cast).collect(),
        }
    }
}

impl<T: Real> From<Monomial<T>> for Posynomial<T> {
    fn from(m: Monomial<T>) -> Self {
        Self { terms: vec![m] }
    }
}

impl<T: Real> fmt::Display for Posynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// `1 + x_id`.
pub fn one_plus<T: Real>(id: VarId) -> Posynomial<T> {
    Posynomial {
        terms: vec![Monomial::constant(T::one()).unwrap(), Monomial::var(id)],
    }
}
