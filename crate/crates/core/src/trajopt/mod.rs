//! Augmented Lagrangian trajectory optimization.
//!
//! The inner solver is Gauss-Newton on the augmented Lagrangian with an
//! Armijo backtracking line search. The objective is quadratic, so its
//! Hessian enters exactly; constraints contribute `rho * J^T J`.
//! Inequalities use the squared-hinge term `max(0, g + mu / rho)^2`.

mod banded;
mod init;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nlp::{constraints, objective, ConstraintEval, NlpSpec, Trajectory};
use banded::BandedSpd;
pub use init::default_init;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tol_constraint: f64,
    pub tol_stationarity: f64,
    pub rho_init: f64,
    pub rho_growth: f64,
    pub rho_max: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Give up when the violation shrinks by less than 0.1% over this many
    /// accepted outer iterations (an infeasible program); 0 disables.
    pub stall_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_constraint: 1e-4,
            tol_stationarity: 1e-5,
            rho_init: 1.0,
            rho_growth: 2.0,
            rho_max: 1e6,
            max_outer: 30,
            max_inner: 100,
            stall_window: 5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = [
            self.tol_constraint,
            self.tol_stationarity,
            self.rho_init,
            self.rho_max,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.max_outer == 0 || self.max_inner == 0 {
            return Err(SolveError::InvalidOptions("tolerances, rho and iteration limits must be positive".into()));
        }
        if !(self.rho_growth > 1.0) {
            return Err(SolveError::InvalidOptions("rho_growth must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Trajectory,
    pub converged: bool,
    pub max_h_violation: f64,
    pub max_g_violation: f64,
    pub objective: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
    /// Constraint violation after each accepted outer iteration, starting
    /// with the initial guess.
    pub violation_history: Vec<f64>,
}

impl Solution {
    pub fn max_violation(&self) -> f64 {
        self.max_h_violation.max(self.max_g_violation)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("objective or constraints became non-finite")]
    NonFiniteObjective { best: Box<Solution> },
    #[error("initial trajectory has shape {got:?}, program expects {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}

fn violation(ce: &ConstraintEval) -> f64 {
    ce.max_h_violation().max(ce.max_g_violation())
}

struct Multipliers {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    rho: f64,
}

struct Point {
    z: Vec<f64>,
    f: f64,
    grad_f: Vec<f64>,
    ce: ConstraintEval,
}

impl Point {
    fn at(nlp: &NlpSpec, z: Vec<f64>) -> Self {
        let obj = objective::eval_flat(nlp, &z);
        let ce = constraints::eval_flat(nlp, &z);
        Self {
            z,
            f: obj.value,
            grad_f: obj.grad,
            ce,
        }
    }

    fn finite(&self) -> bool {
        self.f.is_finite()
            && self.ce.h.iter().chain(&self.ce.g).all(|v| v.is_finite())
            && self.grad_f.iter().all(|v| v.is_finite())
    }

    fn lagrangian(&self, m: &Multipliers) -> f64 {
        let rho = m.rho;
        let mut l = self.f;
        for (h, lam) in self.ce.h.iter().zip(&m.lambda) {
            l += lam * h + 0.5 * rho * h * h;
        }
        for (g, mu) in self.ce.g.iter().zip(&m.mu) {
            let s = (mu + rho * g).max(0.0);
            l += (s * s - mu * mu) / (2.0 * rho);
        }
        l
    }

    fn lagrangian_grad(&self, m: &Multipliers) -> Vec<f64> {
        let mut grad = self.grad_f.clone();
        for ((row, h), lam) in self.ce.jh.iter().zip(&self.ce.h).zip(&m.lambda) {
            let w = lam + m.rho * h;
            for &(i, v) in row {
                grad[i] += w * v;
            }
        }
        for ((row, g), mu) in self.ce.jg.iter().zip(&self.ce.g).zip(&m.mu) {
            let w = (mu + m.rho * g).max(0.0);
            if w > 0.0 {
                for &(i, v) in row {
                    grad[i] += w * v;
                }
            }
        }
        grad
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn bandwidth(nlp: &NlpSpec, ce: &ConstraintEval) -> usize {
    let rows = ce.jh.iter().chain(&ce.jg);
    let spread = rows
        .filter_map(|r| {
            let lo = r.iter().map(|e| e.0).min()?;
            let hi = r.iter().map(|e| e.0).max()?;
            Some(hi - lo)
        })
        .max()
        .unwrap_or(0);
    spread.max(2 * nlp.dim)
}

/// Gauss-Newton matrix of the augmented Lagrangian at `p`.
fn gn_matrix(nlp: &NlpSpec, p: &Point, m: &Multipliers, bw: usize) -> BandedSpd {
    let mut a = BandedSpd::zeros(p.z.len(), bw);
    objective::hessian_entries(nlp, |i, j, v| a.add(i, j, v));
    let mut add_rows = |row: &Vec<(usize, f64)>| {
        for (k, &(i, vi)) in row.iter().enumerate() {
            for &(j, vj) in &row[k..] {
                a.add(i, j, m.rho * vi * vj);
            }
        }
    };
    for row in &p.ce.jh {
        add_rows(row);
    }
    for (row, (g, mu)) in p.ce.jg.iter().zip(p.ce.g.iter().zip(&m.mu)) {
        if mu + m.rho * g > 0.0 {
            add_rows(row);
        }
    }
    a
}

/// Solves `A d = -grad`, adding Levenberg damping when `A` is not positive definite.
fn newton_direction(a: BandedSpd, grad: &[f64]) -> Option<Vec<f64>> {
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    let scale = a.max_diagonal().max(1.0);
    if let Some(l) = a.clone().cholesky() {
        return Some(l.solve(&rhs));
    }
    let mut damping = 1e-8 * scale;
    for _ in 0..12 {
        let mut damped = a.clone();
        damped.add_diagonal(damping);
        if let Some(l) = damped.cholesky() {
            return Some(l.solve(&rhs));
        }
        damping *= 100.0;
    }
    None
}

/// Least-squares multiplier estimate `min |grad f + J^T y|` over equality
/// rows and currently active inequality rows.
fn initial_multipliers(p: &Point, tol: f64) -> (Vec<f64>, Vec<f64>) {
    let n = p.z.len();
    let active: Vec<usize> = (0..p.ce.g.len()).filter(|&j| p.ce.g[j] >= -tol).collect();
    let m = p.ce.h.len() + active.len();
    let zeros = (vec![0.0; p.ce.h.len()], vec![0.0; p.ce.g.len()]);
    if m == 0 {
        return zeros;
    }
    let mut a = DMatrix::<f64>::zeros(m, n);
    for (r, row) in p.ce.jh.iter().chain(active.iter().map(|&j| &p.ce.jg[j])).enumerate() {
        for &(c, v) in row {
            a[(r, c)] += v;
        }
    }
    let g = DVector::from_column_slice(&p.grad_f);
    let mut aat = &a * a.transpose();
    let eps = 1e-10 * (aat.trace() / m as f64).max(1e-12);
    for i in 0..m {
        aat[(i, i)] += eps;
    }
    let Some(chol) = aat.cholesky() else {
        return zeros;
    };
    let y = chol.solve(&(-(&a * g)));
    if y.iter().any(|v| !v.is_finite()) {
        return zeros;
    }
    let lambda = y.rows(0, p.ce.h.len()).iter().copied().collect();
    let mut mu = vec![0.0; p.ce.g.len()];
    for (k, &j) in active.iter().enumerate() {
        mu[j] = y[p.ce.h.len() + k].max(0.0);
    }
    (lambda, mu)
}

struct InnerResult {
    point: Point,
    stationarity: f64,
    iters: usize,
}

enum InnerError {
    NonFinite,
}

fn inner_solve(
    nlp: &NlpSpec,
    start: &Point,
    m: &Multipliers,
    opts: &SolverOptions,
    bw: usize,
) -> Result<InnerResult, InnerError> {
    let mut p = Point {
        z: start.z.clone(),
        f: start.f,
        grad_f: start.grad_f.clone(),
        ce: start.ce.clone(),
    };
    let mut l = p.lagrangian(m);
    let mut grad = p.lagrangian_grad(m);
    let mut iters = 0;
    while iters < opts.max_inner {
        if sup_norm(&grad) <= opts.tol_stationarity {
            break;
        }
        iters += 1;
        let a = gn_matrix(nlp, &p, m, bw);
        let mut d = newton_direction(a, &grad).unwrap_or_else(|| grad.iter().map(|g| -g).collect());
        let mut slope: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            d = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let z: Vec<f64> = p.z.iter().zip(&d).map(|(z, d)| z + alpha * d).collect();
            let trial = Point::at(nlp, z);
            if trial.finite() {
                let lt = trial.lagrangian(m);
                if lt <= l + 1e-4 * alpha * slope {
                    accepted = Some((trial, lt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, lt)) = accepted else {
            // no decrease available at machine precision
            break;
        };
        if !lt.is_finite() {
            return Err(InnerError::NonFinite);
        }
        p = trial;
        l = lt;
        grad = p.lagrangian_grad(m);
    }
    let stationarity = sup_norm(&grad);
    if !stationarity.is_finite() {
        return Err(InnerError::NonFinite);
    }
    Ok(InnerResult {
        point: p,
        stationarity,
        iters,
    })
}

fn package(
    x_init: &Trajectory,
    p: &Point,
    converged: bool,
    outer: usize,
    inner: usize,
    history: Vec<f64>,
) -> Solution {
    Solution {
        x: x_init.with_data_unchecked(p.z.clone()),
        converged,
        max_h_violation: p.ce.max_h_violation(),
        max_g_violation: p.ce.max_g_violation(),
        objective: p.f,
        outer_iters: outer,
        inner_iters: inner,
        violation_history: history,
    }
}

/// Minimizes the program's objective subject to its constraints from `x_init`.
pub fn solve(nlp: &NlpSpec, x_init: &Trajectory, opts: &SolverOptions) -> Result<Solution, SolveError> {
    opts.validate()?;
    if x_init.steps() != nlp.steps || x_init.dim() != nlp.dim {
        return Err(SolveError::DimensionMismatch {
            expected: (nlp.steps, nlp.dim),
            got: (x_init.steps(), x_init.dim()),
        });
    }
    let mut p = Point::at(nlp, x_init.as_slice().to_vec());
    if !p.finite() {
        let best = package(x_init, &p, false, 0, 0, vec![]);
        return Err(SolveError::NonFiniteObjective { best: Box::new(best) });
    }
    let bw = bandwidth(nlp, &p.ce);
    let (lambda, mu) = initial_multipliers(&p, opts.tol_constraint);
    let mut m = Multipliers {
        lambda,
        mu,
        rho: opts.rho_init,
    };
    let mut viol = violation(&p.ce);
    let mut history = vec![viol];
    let mut inner_total = 0;
    let mut outer = 0;
    let mut converged = false;

    while outer < opts.max_outer {
        outer += 1;
        let r = match inner_solve(nlp, &p, &m, opts, bw) {
            Ok(r) => r,
            Err(InnerError::NonFinite) => {
                let best = package(x_init, &p, false, outer, inner_total, history);
                return Err(SolveError::NonFiniteObjective { best: Box::new(best) });
            }
        };
        inner_total += r.iters;
        let v = violation(&r.point.ce);
        if v > viol + 1e-12 {
            // keep the outer violation monotone: stiffen and retry from the accepted iterate
            if m.rho >= opts.rho_max {
                break;
            }
            m.rho = (m.rho * opts.rho_growth).min(opts.rho_max);
            continue;
        }
        p = r.point;
        history.push(v);
        if v <= opts.tol_constraint && r.stationarity <= opts.tol_stationarity {
            converged = true;
            break;
        }
        for (lam, h) in m.lambda.iter_mut().zip(&p.ce.h) {
            *lam += m.rho * h;
        }
        for (mu, g) in m.mu.iter_mut().zip(&p.ce.g) {
            *mu = (*mu + m.rho * g).max(0.0);
        }
        let w = opts.stall_window;
        if w > 0 && history.len() > w && v > (1.0 - 1e-3) * history[history.len() - 1 - w] {
            break;
        }
        if v > 0.5 * viol {
            m.rho = (m.rho * opts.rho_growth).min(opts.rho_max);
        }
        viol = v;
    }
    Ok(package(x_init, &p, converged, outer, inner_total, history))
}
