//! Primal log-barrier method on the log-domain convex form.
//!
//! Equalities are eliminated by working in coordinates `z` of the affine
//! solution set, `y = y_p + B z` with orthonormal `B`. Each centering step
//! minimizes `t·f0(y) − Σ ln(b_i − f_i(y))` by damped Newton; `t` grows by
//! `mu` until the KKT residual drops below tolerance. Phase 1 is the same
//! routine on an augmented program with a common slack variable.

use crate::scalar::Real;

use super::convex::{AffineTerm, ConvexForm, LogSumExp, LseEval};
use super::linalg::{solve_affine, AffineSubspace, SquareMatrix};
use super::problem::{GpError, GpProblem, GpSolution, SolveStatus, SolverOptions};

/// Half-width (in `ln x`) of the box phase 1 searches around its start.
const PHASE1_RADIUS: f64 = 40.0;
/// Lower bound on the phase-1 slack `ln t`.
const PHASE1_FLOOR: f64 = -1.0;
const ARMIJO_ALPHA: f64 = 0.01;
const BACKTRACK: f64 = 0.5;
const MAX_T: f64 = 1e30;

#[derive(Clone, Debug)]
pub(crate) enum Reduction<T> {
    Identity,
    Affine(AffineSubspace<T>),
}

impl<T: Real> Reduction<T> {
    pub(crate) fn for_form(form: &ConvexForm<T>) -> Option<Self> {
        if form.equalities.is_empty() {
            return Some(Self::Identity);
        }
        let n = form.var_count;
        let rows: Vec<Vec<T>> = form
            .equalities
            .iter()
            .map(|e| {
                let mut r = vec![T::zero(); n + 1];
                for &(k, d) in &e.coeffs {
                    r[k] += d;
                }
                r[n] = e.rhs;
                r
            })
            .collect();
        solve_affine(&rows, n).map(Self::Affine)
    }

    fn lift(&self, z: &[T]) -> Vec<T> {
        match self {
            Self::Identity => z.to_vec(),
            Self::Affine(a) => {
                let mut y = a.particular.clone();
                for (zk, b) in z.iter().zip(&a.basis) {
                    for (yi, &bi) in y.iter_mut().zip(b) {
                        *yi += *zk * bi;
                    }
                }
                y
            }
        }
    }

    fn project(&self, y: &[T]) -> Vec<T> {
        match self {
            Self::Identity => y.to_vec(),
            Self::Affine(a) => a
                .basis
                .iter()
                .map(|b| {
                    b.iter()
                        .zip(y.iter().zip(&a.particular))
                        .map(|(&bi, (&yi, &pi))| bi * (yi - pi))
                        .sum()
                })
                .collect(),
        }
    }

    pub(crate) fn reduce_grad(&self, g: &[T]) -> Vec<T> {
        match self {
            Self::Identity => g.to_vec(),
            Self::Affine(a) => a
                .basis
                .iter()
                .map(|b| b.iter().zip(g).map(|(&x, &y)| x * y).sum())
                .collect(),
        }
    }

    fn reduce_hess(&self, h: SquareMatrix<T>) -> SquareMatrix<T> {
        match self {
            Self::Identity => h,
            Self::Affine(a) => {
                let n = h.dim();
                let k = a.basis.len();
                // HB columns
                let hb: Vec<Vec<T>> = a
                    .basis
                    .iter()
                    .map(|b| {
                        (0..n)
                            .map(|i| (0..n).map(|j| h.get(i, j) * b[j]).sum())
                            .collect()
                    })
                    .collect();
                let mut out = SquareMatrix::zeros(k);
                for p in 0..k {
                    for q in 0..k {
                        let v: T = a.basis[p].iter().zip(&hb[q]).map(|(&x, &y)| x * y).sum();
                        out.add_to(p, q, v);
                    }
                }
                out
            }
        }
    }
}

/// Residual pieces of the log-domain KKT system at `y` with multipliers `lambda`.
pub(crate) fn kkt_norm<T: Real>(
    form: &ConvexForm<T>,
    red: &Reduction<T>,
    y: &[T],
    lambda: &[T],
) -> T {
    let n = form.var_count;
    let mut g = form.objective.gradient(y);
    let mut sq = T::zero();
    for (f, &l) in form.inequalities.iter().zip(lambda) {
        let e = f.eval(y, false);
        for (loc, &v) in f.vars.iter().enumerate() {
            g[v] += l * e.grad[loc];
        }
        let comp = l * e.value;
        let primal = e.value.max(T::zero());
        let dual = (-l).max(T::zero());
        sq += comp * comp + primal * primal + dual * dual;
    }
    debug_assert_eq!(g.len(), n);
    let stat = red.reduce_grad(&g);
    sq += stat.iter().map(|&v| v * v).sum::<T>();
    for e in &form.equalities {
        let r = e.residual(y);
        sq += r * r;
    }
    sq.sqrt()
}

/// `λ ≥ 0` minimizing `‖∇f₀ + Σ λ_i ∇f_i‖² + Σ (λ_i f_i)²` over the
/// reduced space, by one linear solve followed by clamping.
fn least_squares_multipliers<T: Real>(form: &ConvexForm<T>, red: &Reduction<T>, y: &[T]) -> Option<Vec<T>> {
    let m = form.inequalities.len();
    if m == 0 {
        return None;
    }
    let g0 = red.reduce_grad(&form.objective.gradient(y));
    let mut jac = Vec::with_capacity(m);
    let mut vals = Vec::with_capacity(m);
    for f in &form.inequalities {
        let e = f.eval(y, false);
        let mut g = vec![T::zero(); form.var_count];
        for (loc, &v) in f.vars.iter().enumerate() {
            g[v] += e.grad[loc];
        }
        jac.push(red.reduce_grad(&g));
        vals.push(e.value);
    }
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
    let mut normal = SquareMatrix::zeros(m);
    let mut rhs = vec![T::zero(); m];
    for i in 0..m {
        rhs[i] = -dot(&jac[i], &g0);
        for j in 0..=i {
            let mut v = dot(&jac[i], &jac[j]);
            if i == j {
                v += vals[i] * vals[i];
            }
            normal.add_to(i, j, v);
            if i != j {
                normal.add_to(j, i, v);
            }
        }
    }
    let lambda = normal.solve_spd(&rhs)?;
    Some(lambda.into_iter().map(|l| l.max(T::zero())).collect())
}

struct Centered<T> {
    y: Vec<T>,
    lambda: Vec<T>,
    kkt: T,
    newton_steps: usize,
    status: SolveStatus,
    stopped_early: bool,
}

struct BarrierRun<'a, T> {
    form: &'a ConvexForm<T>,
    red: &'a Reduction<T>,
    bounds: Vec<T>,
    opts: &'a SolverOptions<T>,
}

impl<T: Real> BarrierRun<'_, T> {
    fn slacks(&self, y: &[T]) -> Option<Vec<T>> {
        let mut u = Vec::with_capacity(self.bounds.len());
        for (f, &b) in self.form.inequalities.iter().zip(&self.bounds) {
            let v = b - f.value(y);
            if !(v > T::zero()) || !v.is_finite() {
                return None;
            }
            u.push(v);
        }
        Some(u)
    }

    fn phi(&self, t: T, y: &[T]) -> Option<(T, T)> {
        let u = self.slacks(y)?;
        let f0 = self.form.objective.value(y);
        if !f0.is_finite() {
            return None;
        }
        let logs: T = u.iter().map(|v| v.ln()).sum();
        let mag = (t * f0).abs() + u.iter().map(|v| v.ln().abs()).sum::<T>();
        Some((t * f0 - logs, mag))
    }

    fn derivatives(&self, t: T, y: &[T]) -> (Vec<T>, SquareMatrix<T>) {
        let n = self.form.var_count;
        let mut g = vec![T::zero(); n];
        let mut h = SquareMatrix::zeros(n);
        let e0 = self.form.objective.eval(y, true);
        self.form.objective.scatter(&e0, t, T::zero(), t, &mut h, &mut g);
        for (f, &b) in self.form.inequalities.iter().zip(&self.bounds) {
            let e: LseEval<T> = f.eval(y, true);
            let u = b - e.value;
            f.scatter(&e, u.recip(), (u * u).recip(), u.recip(), &mut h, &mut g);
        }
        (self.red.reduce_grad(&g), self.red.reduce_hess(h))
    }

    fn multipliers(&self, t: T, y: &[T]) -> Vec<T> {
        self.slacks(y)
            .map(|u| u.iter().map(|&v| (t * v).recip()).collect())
            .unwrap_or_else(|| vec![T::zero(); self.bounds.len()])
    }

    /// Barrier multipliers `1/(t u_i)` or, when smaller in KKT norm, the
    /// least-squares multipliers at `y`. Near the boundary the slacks lose
    /// relative precision, which pollutes the barrier estimate.
    fn best_multipliers(&self, t: T, y: &[T]) -> (Vec<T>, T) {
        let barrier = self.multipliers(t, y);
        let kb = kkt_norm(self.form, self.red, y, &barrier);
        match least_squares_multipliers(self.form, self.red, y) {
            Some(ls) => {
                let kl = kkt_norm(self.form, self.red, y, &ls);
                if kl < kb {
                    (ls, kl)
                } else {
                    (barrier, kb)
                }
            }
            None => (barrier, kb),
        }
    }

    /// Runs the full path-following loop starting from a strictly feasible `z`.
    fn run(&self, mut z: Vec<T>, stop_early: &dyn Fn(&[T]) -> bool) -> Centered<T> {
        let m = self.bounds.len();
        let mut t = self.opts.t0;
        let mut steps = 0usize;
        let newton_tol = T::tol(1e-12);
        let y_limit = T::max_value().ln() * T::lit(0.9);
        let done = |z: Vec<T>, t: T, steps: usize, status: SolveStatus, early: bool| {
            let y = self.red.lift(&z);
            let (lambda, kkt) = self.best_multipliers(t, &y);
            Centered {
                y,
                lambda,
                kkt,
                newton_steps: steps,
                status,
                stopped_early: early,
            }
        };
        loop {
            // centering
            loop {
                if steps >= self.opts.max_iterations {
                    return done(z, t, steps, SolveStatus::MaxIterations, false);
                }
                let y = self.red.lift(&z);
                let (g, h) = self.derivatives(t, &y);
                if g.iter().any(|v| !v.is_finite()) {
                    return done(z, t, steps, SolveStatus::NumericalFailure, false);
                }
                let neg: Vec<T> = g.iter().map(|&v| -v).collect();
                let Some(dz) = h.solve_spd(&neg) else {
                    return done(z, t, steps, SolveStatus::NumericalFailure, false);
                };
                let dec: T = g.iter().zip(&dz).map(|(&a, &b)| -a * b).sum();
                if dec / T::lit(2.0) <= newton_tol {
                    // final undamped step; cheap and sharpens stationarity
                    let zn: Vec<T> = z.iter().zip(&dz).map(|(&a, &d)| a + d).collect();
                    if self.slacks(&self.red.lift(&zn)).is_some() {
                        z = zn;
                    }
                    break;
                }
                steps += 1;
                let Some((phi0, mag)) = self.phi(t, &y) else {
                    return done(z, t, steps, SolveStatus::NumericalFailure, false);
                };
                let slack = T::epsilon() * T::lit(100.0) * (mag + T::one());
                let mut s = T::one();
                let mut accepted = None;
                while s > T::lit(1e-20) {
                    let zn: Vec<T> = z.iter().zip(&dz).map(|(&a, &d)| a + s * d).collect();
                    let yn = self.red.lift(&zn);
                    if let Some((phin, _)) = self.phi(t, &yn) {
                        if phin <= phi0 - T::lit(ARMIJO_ALPHA) * s * dec + slack {
                            accepted = Some((zn, phin < phi0));
                            break;
                        }
                    }
                    s *= T::lit(BACKTRACK);
                }
                // no measurable progress left at this t
                let Some((zn, decreased)) = accepted else {
                    break;
                };
                z = zn;
                if !decreased {
                    break;
                }
                let y = self.red.lift(&z);
                if y.iter().any(|v| !v.is_finite() || v.abs() > y_limit) {
                    return done(z, t, steps, SolveStatus::NumericalFailure, false);
                }
                if stop_early(&y) {
                    return done(z, t, steps, SolveStatus::Optimal, true);
                }
            }
            let y = self.red.lift(&z);
            let (_, kkt) = self.best_multipliers(t, &y);
            if kkt <= self.opts.kkt_tol || (m == 0 && kkt <= self.opts.kkt_tol * T::lit(10.0)) {
                return done(z, t, steps, SolveStatus::Optimal, false);
            }
            if m == 0 {
                // Newton has converged as far as it can; nothing to anneal.
                return done(z, t, steps, SolveStatus::NumericalFailure, false);
            }
            t *= self.opts.mu;
            if t > T::lit(MAX_T) {
                return done(z, t, steps, SolveStatus::NumericalFailure, false);
            }
        }
    }
}

/// Phase-1 program in variables `(y, τ)`: minimize τ s.t. `f_i(y) − τ ≤ 0`,
/// `τ ≥ PHASE1_FLOOR` and a box of radius `PHASE1_RADIUS` around `y0`.
fn phase1_form<T: Real>(form: &ConvexForm<T>, y0: &[T]) -> ConvexForm<T> {
    let n = form.var_count;
    let tau = n;
    let with_tau = |f: &LogSumExp<T>| {
        let mut vars = f.vars.clone();
        vars.push(tau);
        let lt = vars.len() - 1;
        LogSumExp {
            vars,
            terms: f
                .terms
                .iter()
                .map(|t| {
                    let mut coeffs = t.coeffs.clone();
                    coeffs.push((lt, -T::one()));
                    AffineTerm {
                        offset: t.offset,
                        coeffs,
                    }
                })
                .collect(),
        }
    };
    let linear = |var: usize, coef: T, offset: T| LogSumExp {
        vars: vec![var],
        terms: vec![AffineTerm {
            offset,
            coeffs: vec![(0, coef)],
        }],
    };
    let radius = T::lit(PHASE1_RADIUS);
    let mut inequalities: Vec<LogSumExp<T>> = form.inequalities.iter().map(with_tau).collect();
    inequalities.push(linear(tau, -T::one(), T::lit(PHASE1_FLOOR)));
    for (k, &yk) in y0.iter().enumerate() {
        inequalities.push(linear(k, T::one(), -yk - radius));
        inequalities.push(linear(k, -T::one(), yk - radius));
    }
    ConvexForm {
        objective: linear(tau, T::one(), T::zero()),
        inequalities,
        equalities: form.equalities.clone(),
        var_count: n + 1,
    }
}

fn max_violation<T: Real>(form: &ConvexForm<T>, y: &[T]) -> T {
    form.inequalities
        .iter()
        .map(|f| f.value(y))
        .fold(T::neg_infinity(), T::max)
}

/// Solves a GP from the default start `x = 1`.
pub fn solve<T: Real>(gp: &GpProblem<T>, opts: &SolverOptions<T>) -> Result<GpSolution<T>, GpError> {
    solve_from(gp, &vec![T::one(); gp.var_count()], opts)
}

/// Solves a GP starting from `x0` (projected onto the equality set; phase 1
/// runs only if the projection is not strictly feasible).
pub fn solve_from<T: Real>(
    gp: &GpProblem<T>,
    x0: &[T],
    opts: &SolverOptions<T>,
) -> Result<GpSolution<T>, GpError> {
    opts.validate()?;
    let n = gp.var_count();
    if x0.len() != n {
        return Err(GpError::BadInitialLength {
            got: x0.len(),
            expected: n,
        });
    }
    if let Some(i) = x0.iter().position(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(GpError::BadInitialPoint(i));
    }
    let form = super::convex::to_convex(gp);
    let m = form.inequalities.len();
    let Some(red) = Reduction::for_form(&form) else {
        return Ok(failed(gp, x0.to_vec(), SolveStatus::Infeasible, 0, m, None));
    };
    let y_init: Vec<T> = x0.iter().map(|v| v.ln()).collect();
    let mut z = red.project(&y_init);
    let mut y = red.lift(&z);
    let mut iterations = 0usize;
    let mut phase1_slack = None;
    let mut bounds = vec![T::zero(); m];

    if m > 0 && !(max_violation(&form, &y) < T::zero()) {
        let p1 = phase1_form(&form, &y);
        let Some(red1) = Reduction::for_form(&p1) else {
            return Ok(failed(gp, x0.to_vec(), SolveStatus::Infeasible, 0, m, None));
        };
        let tau0 = max_violation(&form, &y).max(T::lit(PHASE1_FLOOR)) + T::one();
        let mut y1 = y.clone();
        y1.push(tau0);
        let z1 = red1.project(&y1);
        let run1 = BarrierRun {
            form: &p1,
            red: &red1,
            bounds: vec![T::zero(); p1.inequalities.len()],
            opts,
        };
        let stop = |yt: &[T]| max_violation(&form, &yt[..n]) < T::zero();
        let res = run1.run(z1, &stop);
        iterations += res.newton_steps;
        let y_p1 = res.y[..n].to_vec();
        let worst = max_violation(&form, &y_p1);
        phase1_slack = Some(worst.exp());
        if !res.stopped_early {
            let relax_cap = opts.feasibility_tol.ln_1p();
            let relax = worst + relax_cap * T::lit(1e-3);
            let converged = res.status == SolveStatus::Optimal;
            if relax > relax_cap || !(worst.is_finite()) {
                let status = if converged || relax > relax_cap * T::lit(10.0) {
                    SolveStatus::Infeasible
                } else {
                    res.status
                };
                let x = y_p1.iter().map(|v| v.exp()).collect();
                return Ok(failed(gp, x, status, iterations, m, phase1_slack));
            }
            // Empty interior but feasible within tolerance: solve the
            // uniformly relaxed problem.
            bounds = vec![relax.max(T::zero()); m];
        }
        y = y_p1;
        z = red.project(&y);
    }

    let run = BarrierRun {
        form: &form,
        red: &red,
        bounds,
        opts,
    };
    if run.slacks(&red.lift(&z)).is_none() {
        return Ok(failed(gp, x0.to_vec(), SolveStatus::NumericalFailure, iterations, m, phase1_slack));
    }
    let res = run.run(z, &|_| false);
    iterations += res.newton_steps;
    let x: Vec<T> = res.y.iter().map(|v| v.exp()).collect();
    let objective_value = gp.objective().eval(&x).unwrap_or(T::nan());
    let mut status = res.status;
    if status == SolveStatus::Optimal {
        let worst = gp.max_constraint_value(&x).unwrap_or(T::infinity());
        if worst > T::one() + opts.feasibility_tol || !objective_value.is_finite() {
            status = SolveStatus::NumericalFailure;
        }
    }
    Ok(GpSolution {
        x,
        objective_value,
        status,
        kkt_residual: res.kkt,
        iterations,
        multipliers: res.lambda,
        phase1_slack,
    })
}

fn failed<T: Real>(
    gp: &GpProblem<T>,
    x: Vec<T>,
    status: SolveStatus,
    iterations: usize,
    m: usize,
    phase1_slack: Option<T>,
) -> GpSolution<T> {
    let objective_value = gp.objective().eval(&x).unwrap_or(T::nan());
    GpSolution {
        x,
        objective_value,
        status,
        kkt_residual: T::infinity(),
        iterations,
        multipliers: vec![T::zero(); m],
        phase1_slack,
    }
}

/// KKT residual of `gp` at `x` with inequality multipliers `multipliers`
/// (log-domain): stationarity projected onto the equality set, complementarity,
/// primal and dual feasibility, and equality residuals, in one Euclidean norm.
pub fn kkt_residual<T: Real>(gp: &GpProblem<T>, x: &[T], multipliers: &[T]) -> T {
    let form = super::convex::to_convex(gp);
    let y: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let Some(red) = Reduction::for_form(&form) else {
        return T::infinity();
    };
    let mut lambda = multipliers.to_vec();
    lambda.resize(form.inequalities.len(), T::zero());
    kkt_norm(&form, &red, &y, &lambda)
}
