//! Perron iterations `u_{n+1} = Φ(u_n)`, where `Φ(v)` solves
//! `F(D²u) = −a(x)(v + t)^p`. `Φ` is order preserving, so runs started from
//! discrete super- or subsolutions are monotone.

use alloc::format;
use alloc::vec::Vec;

use super::linear::{linear_dirichlet_solve, LinearOptions};
use super::scheme::Discretization;
use super::{
    equation_residual, sup_diff, sup_norm, DiscreteState, HistoryEntry, Monotonicity, OperatorSign, ProblemSpec,
};
use crate::domain::{CRDomain, Point};
use crate::error::{invalid, Error, Result};
use crate::oracles::{pplus_supersolution, subsolution_envelope, supersolution_envelope};

/// Roughly this many grid nodes serve as bump centers for the subsolution envelope.
const ENVELOPE_SAMPLES: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerronOptions {
    /// A run is stationary once `sup|u_{n+1} − u_n| ≤ tol · sup u_n`.
    pub tol: f64,
    /// Relative sub/super gap required of a squeeze.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// For `p ≥ 1`, a run whose sup-norm drops to this level has collapsed to zero.
    pub zero_tol: f64,
    /// Rescale by homogeneity at every step (`p < 1`, `t = 0`): the initial
    /// data become genuine discrete super- or subsolutions, and later steps
    /// jump to the extreme admissible amplitude.
    pub rescale: bool,
    pub linear: LinearOptions,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions {
            tol: 1e-10,
            gap_tol: 1e-4,
            max_iter: 400,
            zero_tol: 1e-12,
            rescale: true,
            linear: LinearOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunDirection {
    Descending,
    Ascending,
}

/// `Φ(v)`: the solution of `F(D²u) = −a(x)(v + t)^p` with zero boundary data.
pub fn forcing_map(
    disc: &Discretization,
    spec: &ProblemSpec,
    v: &[f64],
    warm: Option<&[f64]>,
    linear: &LinearOptions,
) -> Result<DiscreteState> {
    spec.validate()?;
    if spec.k != disc.k() {
        return Err(invalid("problem k differs from the stencil's frame size"));
    }
    let a = disc.sample(|x| spec.coefficient.value(x));
    let f: Vec<f64> = spec.forcing(&a, v).into_iter().map(|g| -g).collect();
    linear_dirichlet_solve(disc, spec.sign, &f, warm, linear)
}

struct Run<'a> {
    disc: &'a Discretization,
    spec: &'a ProblemSpec,
    direction: RunDirection,
    u: Vec<f64>,
    iter: usize,
    change: f64,
    history: Vec<HistoryEntry>,
}

impl<'a> Run<'a> {
    /// Takes the first step.
    fn start(
        disc: &'a Discretization,
        spec: &'a ProblemSpec,
        init: &[f64],
        direction: RunDirection,
        opts: &PerronOptions,
    ) -> Result<Self> {
        if init.len() != disc.len() {
            return Err(Error::DimensionMismatch { expected: disc.len(), found: init.len() });
        }
        if init.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(invalid("initial data must be finite and nonnegative"));
        }
        let mut run =
            Run { disc, spec, direction, u: init.to_vec(), iter: 0, change: f64::INFINITY, history: Vec::new() };
        run.step(opts)?;
        Ok(run)
    }

    /// Rescales `u` by the extreme homogeneity factor that keeps it a discrete
    /// supersolution (descending) or subsolution (ascending), given `z = Φ(u)`.
    /// `Φ(su) = s^p Φ(u)`, so `su` is a supersolution iff `s^{1−p} ≥ Φ(u)_i/u_i`
    /// everywhere. This removes the slowly contracting amplitude error.
    fn rescale(&mut self, z: &mut [f64]) {
        let p = self.spec.p;
        let ratios = self.u.iter().zip(z.iter()).filter(|(&w, _)| w > 0.0).map(|(&w, &f)| f / w);
        let s = match self.direction {
            RunDirection::Descending => libm::pow(ratios.fold(0.0, f64::max), 1.0 / (1.0 - p)),
            RunDirection::Ascending => libm::pow(ratios.fold(f64::INFINITY, f64::min), 1.0 / (1.0 - p)),
        };
        // a descending run may only be scaled down after its start, an ascending one up
        let s = match (self.direction, self.iter) {
            (_, 0) => s,
            (RunDirection::Descending, _) => s.min(1.0),
            (RunDirection::Ascending, _) => s.max(1.0),
        };
        if s.is_finite() && s > 0.0 && s != 1.0 {
            self.u.iter_mut().for_each(|v| *v *= s);
            let sp = libm::pow(s, p);
            z.iter_mut().for_each(|v| *v *= sp);
        }
    }

    fn accept(&mut self, mut next: Vec<f64>) {
        for (x, &old) in next.iter_mut().zip(&self.u) {
            *x = match self.direction {
                RunDirection::Descending => x.min(old),
                RunDirection::Ascending => x.max(old),
            }
            .max(0.0);
        }
        self.change = sup_diff(&next, &self.u);
        self.u = next;
        self.iter += 1;
        self.history.push(HistoryEntry { iter: self.iter, residual: self.change, sup: sup_norm(&self.u) });
    }

    fn step(&mut self, opts: &PerronOptions) -> Result<()> {
        let mut z = forcing_map(self.disc, self.spec, &self.u, Some(&self.u), &opts.linear)?.values;
        if opts.rescale && self.spec.p < 1.0 && self.spec.shift == 0.0 {
            self.rescale(&mut z);
        }
        self.accept(z);
        Ok(())
    }

    fn stationary(&self, opts: &PerronOptions) -> bool {
        let sup = sup_norm(&self.u);
        self.change <= opts.tol * sup || (self.spec.p >= 1.0 && sup <= opts.zero_tol)
    }

    fn finish(self, converged: bool) -> DiscreteState {
        let residual = equation_residual(self.disc, self.spec, &self.u);
        let monotonicity = match self.direction {
            RunDirection::Descending => Monotonicity::Nonincreasing,
            RunDirection::Ascending => Monotonicity::Nondecreasing,
        };
        DiscreteState {
            values: self.u,
            iterations: self.iter,
            residual,
            monotonicity,
            converged,
            history: self.history,
        }
    }
}

/// One-sided Perron run. Steps are clamped by `min` (descending) or `max`
/// (ascending) against the previous iterate, so the sequence is exactly
/// monotone even when the linear solves are inexact.
pub fn monotone_run(
    disc: &Discretization,
    spec: &ProblemSpec,
    init: &[f64],
    direction: RunDirection,
    opts: &PerronOptions,
) -> Result<DiscreteState> {
    let mut run = Run::start(disc, spec, init, direction, opts)?;
    while !run.stationary(opts) && run.iter < opts.max_iter {
        run.step(opts)?;
    }
    let ok = run.stationary(opts);
    Ok(run.finish(ok))
}

/// Result of a two-sided squeeze.
#[derive(Clone, Debug, PartialEq)]
pub struct Squeeze {
    pub lower: DiscreteState,
    pub upper: DiscreteState,
    /// `sup|upper − lower| / sup upper`.
    pub gap: f64,
    pub abs_gap: f64,
    pub converged: bool,
}

impl Squeeze {
    /// The reported solution: the descending limit.
    pub fn solution(&self) -> &[f64] {
        &self.upper.values
    }
}

/// Ascending and descending runs in lockstep; succeeds iff the relative gap
/// ends at or below `gap_tol`.
pub fn squeeze_between(
    disc: &Discretization,
    spec: &ProblemSpec,
    lower_init: &[f64],
    upper_init: &[f64],
    opts: &PerronOptions,
) -> Result<Squeeze> {
    let mut lo = Run::start(disc, spec, lower_init, RunDirection::Ascending, opts)?;
    let mut hi = Run::start(disc, spec, upper_init, RunDirection::Descending, opts)?;
    let gap_of = |lo: &Run, hi: &Run| {
        let abs = sup_diff(&lo.u, &hi.u);
        let sup = sup_norm(&hi.u);
        (if sup > 0.0 { abs / sup } else { abs }, abs)
    };
    let (mut gap, mut abs_gap) = gap_of(&lo, &hi);
    while lo.iter < opts.max_iter && !(lo.stationary(opts) && hi.stationary(opts)) && gap > opts.tol {
        lo.step(opts)?;
        hi.step(opts)?;
        (gap, abs_gap) = gap_of(&lo, &hi);
    }
    let converged = gap <= opts.gap_tol;
    let (lo_ok, hi_ok) = (lo.stationary(opts), hi.stationary(opts));
    Ok(Squeeze { lower: lo.finish(lo_ok), upper: hi.finish(hi_ok), gap, abs_gap, converged })
}

/// Grid nodes taken with a stride so that about `ENVELOPE_SAMPLES` remain.
fn sample_nodes(disc: &Discretization) -> Vec<Point> {
    let stride = (disc.len() / ENVELOPE_SAMPLES).max(1);
    (0..disc.len()).step_by(stride).map(|i| disc.grid().position(i)).collect()
}

/// Two-sided squeeze for `0 < p < 1` between the analytic envelopes: bump
/// subsolutions from below, ball (`Minus`) or quadratic (`Plus`, `Mean`)
/// supersolutions from above.
pub fn squeeze_solve(
    domain: &CRDomain,
    disc: &Discretization,
    spec: &ProblemSpec,
    opts: &PerronOptions,
) -> Result<Squeeze> {
    spec.validate()?;
    if !(spec.p < 1.0) {
        return Err(invalid(format!("squeeze needs 0 < p < 1, got p = {}", spec.p)));
    }
    if domain.dim() != disc.grid().dim() {
        return Err(Error::DimensionMismatch { expected: disc.grid().dim(), found: domain.dim() });
    }
    let upper = match spec.sign {
        OperatorSign::Minus => supersolution_envelope(domain, spec.p, spec.k)?,
        OperatorSign::Plus | OperatorSign::Mean => pplus_supersolution(domain, spec.p, spec.k)?,
    };
    let lower = subsolution_envelope(domain, spec.p, spec.k, &sample_nodes(disc))?;
    let upper_init = disc.sample(|x| upper.value(x));
    let lower_init = disc.sample(|x| lower.value(x));
    squeeze_between(disc, spec, &lower_init, &upper_init, opts)
}
