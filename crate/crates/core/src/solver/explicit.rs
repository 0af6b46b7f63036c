//! Explicit pseudo-time relaxation. Each step reads the previous array and
//! writes a new one, so the result does not depend on node order.

use alloc::vec;
use alloc::vec::Vec;

use super::scheme::Discretization;
use super::{sup_norm, DiscreteState, HistoryEntry, Monotonicity, OperatorSign, ProblemSpec};
use crate::error::{invalid, Error, Result};

/// Step size policy for `u ← u + dt·(S(u) + g)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    /// Per-node `dt_i = cfl / Σc0` of the heaviest frame at node `i`;
    /// `cfl ∈ (0, 1]` keeps every step monotone, also next to shortened arms.
    Local { cfl: f64 },
    /// One step size for all nodes; rejected above the monotonicity limit.
    Global(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoTimeOptions {
    pub step: TimeStep,
    /// Stop when the pseudo-velocity `sup|S(u) + g|` is at most `tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Record a history entry every this many steps.
    pub history_every: usize,
}

impl Default for PseudoTimeOptions {
    fn default() -> Self {
        PseudoTimeOptions { step: TimeStep::Local { cfl: 0.9 }, tol: 1e-10, max_iter: 200_000, history_every: 100 }
    }
}

fn step_sizes(disc: &Discretization, step: TimeStep) -> Result<Vec<f64>> {
    match step {
        TimeStep::Local { cfl } => {
            if !(cfl > 0.0 && cfl <= 1.0) {
                return Err(invalid("local CFL factor must lie in (0, 1]"));
            }
            Ok((0..disc.len()).map(|i| cfl / disc.max_diagonal(i)).collect())
        }
        TimeStep::Global(dt) => {
            let limit = disc.cfl_limit();
            if !(dt > 0.0) {
                return Err(invalid("time step must be positive"));
            }
            if dt > limit {
                return Err(Error::CflViolated { dt, limit });
            }
            Ok(vec![dt; disc.len()])
        }
    }
}

fn relax(
    disc: &Discretization,
    sign: OperatorSign,
    init: Option<&[f64]>,
    opts: &PseudoTimeOptions,
    clamp: bool,
    source: impl Fn(usize, f64) -> f64,
) -> Result<DiscreteState> {
    let n = disc.len();
    let dt = step_sizes(disc, opts.step)?;
    let mut u = match init {
        Some(u0) if u0.len() != n => return Err(Error::DimensionMismatch { expected: n, found: u0.len() }),
        Some(u0) => u0.to_vec(),
        None => vec![0.0; n],
    };
    let clamp = clamp && u.iter().all(|&v| v >= 0.0);
    let mut next = vec![0.0; n];
    let mut history = Vec::new();
    let (mut down, mut up) = (true, true);
    let every = opts.history_every.max(1);
    let mut velocity = f64::INFINITY;
    let mut iter = 0;
    while iter < opts.max_iter {
        velocity = 0.0;
        for i in 0..n {
            let v = disc.operator_at(sign, &u, i) + source(i, u[i]);
            velocity = f64::max(velocity, v.abs());
            let mut x = u[i] + dt[i] * v;
            if clamp && x < 0.0 {
                x = 0.0;
            }
            down &= x <= u[i];
            up &= x >= u[i];
            next[i] = x;
        }
        if iter % every == 0 {
            history.push(HistoryEntry { iter, residual: velocity, sup: sup_norm(&u) });
        }
        if velocity <= opts.tol {
            break;
        }
        core::mem::swap(&mut u, &mut next);
        iter += 1;
    }
    let residual = (0..n).map(|i| (disc.operator_at(sign, &u, i) + source(i, u[i])).abs()).fold(0.0, f64::max);
    history.push(HistoryEntry { iter, residual, sup: sup_norm(&u) });
    let monotonicity = match (down, up) {
        (true, false) => Monotonicity::Nonincreasing,
        (false, true) => Monotonicity::Nondecreasing,
        _ => Monotonicity::Unknown,
    };
    Ok(DiscreteState { values: u, iterations: iter, residual, monotonicity, converged: velocity <= opts.tol, history })
}

/// Pseudo-time relaxation of `F(D²u) + a(x)(max(u,0) + t)^p = 0`.
///
/// The update is monotone, so a discrete supersolution as initial data gives
/// a pointwise nonincreasing sequence and a subsolution a nondecreasing one.
/// Nonnegative initial data stay nonnegative.
pub fn pseudo_time_solve(
    disc: &Discretization,
    spec: &ProblemSpec,
    init: &[f64],
    opts: &PseudoTimeOptions,
) -> Result<DiscreteState> {
    spec.validate()?;
    if spec.k != disc.k() {
        return Err(invalid("problem k differs from the stencil's frame size"));
    }
    let a = disc.sample(|x| spec.coefficient.value(x));
    let (p, t) = (spec.p, spec.shift);
    relax(disc, spec.sign, Some(init), opts, true, |i, ui| a[i] * libm::pow(ui.max(0.0) + t, p))
}

/// Pseudo-time relaxation of `F(D²u) = f` with the forcing frozen.
pub fn pseudo_time_linear(
    disc: &Discretization,
    sign: OperatorSign,
    f: &[f64],
    init: Option<&[f64]>,
    opts: &PseudoTimeOptions,
) -> Result<DiscreteState> {
    if f.len() != disc.len() {
        return Err(Error::DimensionMismatch { expected: disc.len(), found: f.len() });
    }
    relax(disc, sign, init, opts, false, |i, _| -f[i])
}
