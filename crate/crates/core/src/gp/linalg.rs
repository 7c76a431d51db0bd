//! Small dense kernels: Cholesky solves and null-space bases.

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] += v;
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn max_abs_diag(&self) -> T {
        (0..self.n)
            .map(|i| self.get(i, i).abs())
            .fold(T::zero(), T::max)
    }

    /// In-place lower Cholesky factor of `self + shift·I`. Returns `None` if
    /// the shifted matrix is not numerically positive definite.
    fn cholesky(&self, shift: T) -> Option<Vec<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self.get(j, j) + shift;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(l)
    }

    /// Solves `(self + δI) x = rhs` for the smallest diagonal shift δ in a
    /// geometric ladder that makes the factorization succeed.
    pub fn solve_spd(&self, rhs: &[T]) -> Option<Vec<T>> {
        let n = self.n;
        let scale = self.max_abs_diag().max(T::one());
        let mut shift = T::zero();
        let l = loop {
            if let Some(l) = self.cholesky(shift) {
                break l;
            }
            shift = if shift == T::zero() {
                scale * T::epsilon() * T::lit(10.0)
            } else {
                shift * T::lit(100.0)
            };
            if shift > scale * T::lit(1e-2) {
                return None;
            }
        };
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= l[i * n + k] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

/// Affine parametrization `{ y : A y = b } = { particular + basis · z }`
/// with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct AffineSubspace<T> {
    pub particular: Vec<T>,
    /// `basis[k]` is the k-th basis vector (length n).
    pub basis: Vec<Vec<T>>,
}

/// Reduces `[A | b]` (rows of length n + 1) and returns the solution set, or
/// `None` when the system is inconsistent.
pub fn solve_affine<T: Real>(rows: &[Vec<T>], n: usize) -> Option<AffineSubspace<T>> {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let tol = T::epsilon() * T::lit(1e3) * rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::one(), |a, &b| a.max(b.abs()));
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m.len() {
            break;
        }
        let (best, val) = (r..m.len())
            .map(|i| (i, m[i][c].abs()))
            .fold((r, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        m.swap(r, best);
        let p = m[r][c];
        for v in m[r].iter_mut() {
            *v /= p;
        }
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c];
                if f != T::zero() {
                    for k in 0..=n {
                        let sub = f * m[r][k];
                        m[i][k] -= sub;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| row[n].abs() > tol) {
        return None;
    }
    let mut particular = vec![T::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = m[i][n];
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![T::zero(); n];
        v[f] = T::one();
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = -m[i][f];
        }
        // modified Gram-Schmidt
        for b in &basis {
            let d: T = v.iter().zip(b).map(|(&x, &y)| x * y).sum();
            for (x, &y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm = crate::scalar::norm2(&v);
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
    }
    Some(AffineSubspace { particular, basis })
}
