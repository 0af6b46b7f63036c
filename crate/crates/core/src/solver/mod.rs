//! Monotone wide-stencil discretization of `F(D²u) + a(x) u^p = 0` and the
//! iterations built on it.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

mod analysis;
mod explicit;
mod linear;
mod perron;
mod scheme;
mod sparse;
mod stencil;
mod superlinear;

pub use analysis::{apriori_check, boundary_exponent_fit, AprioriCheck, BoundaryFit, FitWindow};
pub use explicit::{pseudo_time_linear, pseudo_time_solve, PseudoTimeOptions, TimeStep};
pub use linear::{linear_dirichlet_solve, LinearOptions};
pub use perron::{forcing_map, monotone_run, squeeze_between, squeeze_solve, PerronOptions, RunDirection, Squeeze};
pub use scheme::{DirectionStencil, Discretization, FrameChoice};
pub use stencil::{StencilScheme, MAX_DIRECTIONS, MAX_FRAMES};
pub use superlinear::{
    normalized_fixed_point, phi_map, principal_eigenvalue_estimate, EigenEstimate, EigenOptions, FixedPoint,
    FixedPointOptions,
};

/// Which frame extreme the discrete operator takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorSign {
    /// `P_k^-`: minimum over frames.
    Minus,
    /// `P_k^+`: maximum over frames.
    Plus,
    /// Average of the two.
    Mean,
}

/// Coefficient `a(x)` in front of the power nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    /// `mean + amplitude · sin(frequency · Σ x_i)`.
    Sine {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Constant(1.0)
    }
}

impl Coefficient {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::Sine { mean, amplitude, frequency } => {
                mean + amplitude * libm::sin(frequency * x.iter().sum::<f64>())
            }
        }
    }

    /// `(inf a, sup a)` over all of space.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Coefficient::Constant(c) => (c, c),
            Coefficient::Sine { mean, amplitude, .. } => (mean - amplitude.abs(), mean + amplitude.abs()),
        }
    }

    pub fn scaled(&self, s: f64) -> Coefficient {
        match *self {
            Coefficient::Constant(c) => Coefficient::Constant(s * c),
            Coefficient::Sine { mean, amplitude, frequency } => {
                Coefficient::Sine { mean: s * mean, amplitude: s * amplitude, frequency }
            }
        }
    }
}

/// `F(D²u) + a(x) (u + shift)^p = 0` with `F` the truncated Laplacian of the
/// given sign and order `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    pub sign: OperatorSign,
    pub k: usize,
    pub p: f64,
    pub coefficient: Coefficient,
    pub shift: f64,
}

impl ProblemSpec {
    pub fn new(sign: OperatorSign, k: usize, p: f64) -> Self {
        ProblemSpec { sign, k, p, coefficient: Coefficient::default(), shift: 0.0 }
    }

    pub fn with_coefficient(mut self, a: Coefficient) -> Self {
        self.coefficient = a;
        self
    }

    pub fn with_shift(mut self, t: f64) -> Self {
        self.shift = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) || !self.p.is_finite() {
            return Err(invalid("exponent p must be positive and finite"));
        }
        if self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        let (lo, hi) = self.coefficient.bounds();
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(invalid("coefficient a(x) must be bounded between positive constants"));
        }
        if !(self.shift >= 0.0) || !self.shift.is_finite() {
            return Err(invalid("shift t must be nonnegative"));
        }
        Ok(())
    }

    /// Forcing `a(x)(max(u,0) + t)^p` at every node.
    pub(crate) fn forcing(&self, a: &[f64], u: &[f64]) -> Vec<f64> {
        u.iter().zip(a).map(|(&ui, &ai)| ai * libm::pow(ui.max(0.0) + self.shift, self.p)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Nonincreasing,
    Nondecreasing,
    /// The run was not monotone, or monotonicity was not tracked.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryEntry {
    pub iter: usize,
    pub residual: f64,
    pub sup: f64,
}

/// Nodal values with convergence diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteState {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm residual of the discrete equation at `values`.
    pub residual: f64,
    pub monotonicity: Monotonicity,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
}

impl DiscreteState {
    pub fn sup(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Sup-norm residual of `F(D²u) + a(u+t)^p` on the grid.
pub fn equation_residual(disc: &Discretization, spec: &ProblemSpec, u: &[f64]) -> f64 {
    let a = disc.sample(|x| spec.coefficient.value(x));
    let g = spec.forcing(&a, u);
    (0..disc.len()).map(|i| (disc.operator_at(spec.sign, u, i) + g[i]).abs()).fold(0.0, f64::max)
}
