//! `P₁⁺` problems: the map `Φ` of the superlinear existence argument, its
//! normalized fixed point and the principal eigenvalue.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::linear::{linear_dirichlet_solve, LinearOptions};
use super::perron::forcing_map;
use super::scheme::Discretization;
use super::{
    equation_residual, sup_diff, sup_norm, DiscreteState, HistoryEntry, Monotonicity, OperatorSign, ProblemSpec,
};
use crate::error::{invalid, Error, Result};

fn require_k1(disc: &Discretization) -> Result<()> {
    if disc.k() != 1 {
        return Err(Error::Configuration(format!("P1+ maps need k = 1, stencil has k = {}", disc.k())));
    }
    Ok(())
}

/// `Φ(v)`: solution of `P₁⁺(D²u) + (v + t)^p = 0`, `u = 0` on the boundary.
pub fn phi_map(disc: &Discretization, p: f64, t: f64, v: &[f64], linear: &LinearOptions) -> Result<DiscreteState> {
    require_k1(disc)?;
    if v.iter().any(|&x| x < 0.0) {
        return Err(invalid("Φ is defined on nonnegative functions"));
    }
    let spec = ProblemSpec::new(OperatorSign::Plus, 1, p).with_shift(t);
    forcing_map(disc, &spec, v, None, linear)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    /// Accept when `sup|P₁⁺(D²u*) + (u*)^p| ≤ tol · (1 + sup u*)`.
    pub tol: f64,
    /// Stop iterating once successive normalized iterates differ by at most this.
    pub step_tol: f64,
    pub max_iter: usize,
    pub linear: LinearOptions,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { tol: 1e-3, step_tol: 1e-10, max_iter: 500, linear: LinearOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    /// `u* = μ^{1/(1−p)} ṽ`.
    pub state: DiscreteState,
    /// Final normalization `μ = sup Φ(ṽ)`.
    pub mu: f64,
    pub mu_history: Vec<f64>,
    /// `sup|P₁⁺(D²u*) + (u*)^p| / (1 + sup u*)`.
    pub relative_residual: f64,
}

/// Iterations without a new smallest step before the fixed-point loop gives up.
const STALL_WINDOW: usize = 50;

/// Iterates `ṽ ← Φ(ṽ)/sup Φ(ṽ)` (with `t = 0`), halving a relaxation factor
/// whenever the step size grows, then rescales the limit by homogeneity.
pub fn normalized_fixed_point(disc: &Discretization, p: f64, opts: &FixedPointOptions) -> Result<FixedPoint> {
    require_k1(disc)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("normalized fixed point needs p > 1, got {p}; use the squeeze for p < 1")));
    }
    let n = disc.len();
    let spec = ProblemSpec::new(OperatorSign::Plus, 1, p);
    let torsion = linear_dirichlet_solve(disc, OperatorSign::Plus, &vec![-1.0; n], None, &opts.linear)?.values;
    let mut v = normalized(torsion);
    let mut w = forcing_map(disc, &spec, &v, None, &opts.linear)?.values;
    let mut mu = sup_norm(&w);
    let mut mu_history = vec![mu];
    let mut history = Vec::new();
    let mut theta = 1.0;
    let mut last_step = f64::INFINITY;
    // the sup normalization is not smooth where the maximum sits, and for larger
    // p a mode can slowly regrow after the step has become tiny; keep the best iterate
    let mut best = (f64::INFINITY, 0, v.clone(), mu);
    let mut iter = 0;
    while iter < opts.max_iter {
        iter += 1;
        let step = sup_diff(&v, &w.iter().map(|x| x / mu).collect::<Vec<_>>());
        history.push(HistoryEntry { iter, residual: step, sup: mu });
        if step < best.0 {
            best = (step, iter, v.clone(), mu);
        }
        if step <= opts.step_tol || iter - best.1 > STALL_WINDOW {
            break;
        }
        if step > last_step {
            theta = f64::max(theta * 0.5, 1.0 / 64.0);
        }
        last_step = step;
        let mixed: Vec<f64> = v.iter().zip(&w).map(|(a, b)| (1.0 - theta) * a + theta * b / mu).collect();
        v = normalized(mixed);
        w = forcing_map(disc, &spec, &v, Some(&w), &opts.linear)?.values;
        mu = sup_norm(&w);
        mu_history.push(mu);
    }
    let (_, _, v, mu) = best;
    let c = libm::pow(mu, 1.0 / (1.0 - p));
    let u: Vec<f64> = v.iter().map(|x| c * x).collect();
    let residual = equation_residual(disc, &spec, &u);
    let relative_residual = residual / (1.0 + sup_norm(&u));
    let converged = relative_residual <= opts.tol;
    Ok(FixedPoint {
        state: DiscreteState {
            values: u,
            iterations: iter,
            residual,
            monotonicity: Monotonicity::Unknown,
            converged,
            history,
        },
        mu,
        mu_history,
        relative_residual,
    })
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s = sup_norm(&v);
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative change of `μ̂` between iterations at convergence.
    pub tol: f64,
    pub max_iter: usize,
    pub linear: LinearOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-10, max_iter: 500, linear: LinearOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenEstimate {
    pub mu: f64,
    /// Mode normalized to sup-norm 1.
    pub mode: Vec<f64>,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Inverse power iteration `v ← Φ_lin(v)/sup Φ_lin(v)` where `Φ_lin(v)` solves
/// `F(D²u) = −v`; `μ̂ = 1/sup Φ_lin(v)` at the limit.
pub fn principal_eigenvalue_estimate(
    disc: &Discretization,
    sign: OperatorSign,
    opts: &EigenOptions,
) -> Result<EigenEstimate> {
    let n = disc.len();
    if n == 0 {
        return Err(invalid("grid has no interior nodes"));
    }
    let mut v = vec![1.0; n];
    let mut w: Option<Vec<f64>> = None;
    let mut history = Vec::new();
    let mut mu = f64::NAN;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let f: Vec<f64> = v.iter().map(|x| -x).collect();
        let sol = linear_dirichlet_solve(disc, sign, &f, w.as_deref(), &opts.linear)?.values;
        let m = sup_norm(&sol);
        if !(m > 0.0) {
            return Err(Error::NonConvergence {
                iterations: history.len(),
                residual: m,
                detail: "mode vanished".into(),
            });
        }
        let next_mu = 1.0 / m;
        let next_v: Vec<f64> = sol.iter().map(|x| x / m).collect();
        let dv = sup_diff(&next_v, &v);
        history.push(next_mu);
        let settled = (next_mu - mu).abs() <= opts.tol * next_mu && dv <= libm::sqrt(opts.tol);
        mu = next_mu;
        v = next_v;
        w = Some(sol);
        if settled {
            converged = true;
            break;
        }
    }
    Ok(EigenEstimate { mu, mode: v, history, converged })
}
