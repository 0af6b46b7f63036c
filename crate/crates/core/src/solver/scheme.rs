use alloc::vec;
use alloc::vec::Vec;

use super::stencil::{StencilScheme, MAX_DIRECTIONS, MAX_FRAMES};
use super::OperatorSign;
use crate::domain::{rasterize, CRDomain, Grid};
use crate::error::{invalid, Result};

pub(crate) const BOUNDARY: u32 = u32::MAX;

/// Three-point second difference along one direction at one node:
/// `cp·u₊ + cm·u₋ − c0·u`, with boundary neighbors contributing zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionStencil {
    pub plus: u32,
    pub minus: u32,
    pub cp: f64,
    pub cm: f64,
    pub c0: f64,
}

/// Chosen frames at a node: `lo` is the minimizing frame, `hi` the maximizing one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct FrameChoice {
    pub lo: u16,
    pub hi: u16,
}

/// A grid together with a stencil scheme and the precomputed second-difference
/// coefficients for every node and direction.
#[derive(Clone, Debug)]
pub struct Discretization {
    grid: Grid,
    scheme: StencilScheme,
    stencils: Vec<DirectionStencil>,
}

impl Discretization {
    pub fn new(grid: Grid, scheme: StencilScheme) -> Result<Self> {
        if grid.directions() != scheme.directions() || grid.dim() != scheme.dim() {
            return Err(invalid("grid was rasterized with different stencil directions"));
        }
        let nd = scheme.directions().len();
        let mut stencils = Vec::with_capacity(grid.len() * nd);
        for node in 0..grid.len() {
            for dir in 0..nd {
                let ap = grid.arm(node, dir, 0);
                let am = grid.arm(node, dir, 1);
                let (a, b) = (ap.length, am.length);
                stencils.push(DirectionStencil {
                    plus: ap.neighbor.unwrap_or(BOUNDARY),
                    minus: am.neighbor.unwrap_or(BOUNDARY),
                    cp: 2.0 / ((a + b) * a),
                    cm: 2.0 / ((a + b) * b),
                    c0: 2.0 / (a * b),
                });
            }
        }
        Ok(Discretization { grid, scheme, stencils })
    }

    /// Rasterizes `domain` at spacing `h` with the scheme's directions.
    pub fn build(domain: &CRDomain, h: f64, scheme: StencilScheme) -> Result<Self> {
        if domain.dim() != scheme.dim() {
            return Err(invalid("domain and stencil dimensions differ"));
        }
        let grid = rasterize(domain, h, scheme.directions())?;
        Self::new(grid, scheme)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> &StencilScheme {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn k(&self) -> usize {
        self.scheme.k()
    }

    pub fn stencil(&self, node: usize, direction: usize) -> &DirectionStencil {
        &self.stencils[node * self.scheme.directions().len() + direction]
    }

    /// Second difference of `u` at `node` along a direction, normalized to the
    /// unit vector `e/|e|`.
    pub fn second_difference(&self, u: &[f64], node: usize, direction: usize) -> f64 {
        let s = self.stencil(node, direction);
        let up = if s.plus == BOUNDARY { 0.0 } else { u[s.plus as usize] };
        let um = if s.minus == BOUNDARY { 0.0 } else { u[s.minus as usize] };
        s.cp * up + s.cm * um - s.c0 * u[node]
    }

    fn frame_sums(&self, u: &[f64], node: usize, buf: &mut [f64]) {
        let nd = self.scheme.directions().len();
        let mut d = [0.0; MAX_DIRECTIONS];
        let dvals = &mut d[..nd];
        for (j, v) in dvals.iter_mut().enumerate() {
            *v = self.second_difference(u, node, j);
        }
        for (f, frame) in self.scheme.frames().iter().enumerate() {
            buf[f] = frame.iter().map(|&j| dvals[j]).sum();
        }
    }

    /// Minimizing and maximizing frames at `node`. A previous choice is kept
    /// when it is within `eps` of the optimum, which keeps policy iteration
    /// from cycling on ties.
    pub fn choose_frames(&self, u: &[f64], node: usize, prev: Option<FrameChoice>, eps: f64) -> FrameChoice {
        let nf = self.scheme.frames().len();
        let mut buf = [0.0; MAX_FRAMES];
        let sums = &mut buf[..nf];
        self.frame_sums(u, node, sums);
        let (mut lo, mut hi) = (0usize, 0usize);
        for f in 1..nf {
            if sums[f] < sums[lo] {
                lo = f;
            }
            if sums[f] > sums[hi] {
                hi = f;
            }
        }
        if let Some(p) = prev {
            if sums[p.lo as usize] <= sums[lo] + eps {
                lo = p.lo as usize;
            }
            if sums[p.hi as usize] >= sums[hi] - eps {
                hi = p.hi as usize;
            }
        }
        FrameChoice { lo: lo as u16, hi: hi as u16 }
    }

    /// Discrete `F(D²u)` at one node: min (−), max (+) or mean over frames of
    /// the summed second differences.
    pub fn operator_at(&self, sign: OperatorSign, u: &[f64], node: usize) -> f64 {
        let nf = self.scheme.frames().len();
        let mut buf = [0.0; MAX_FRAMES];
        let sums = &mut buf[..nf];
        self.frame_sums(u, node, sums);
        let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match sign {
            OperatorSign::Minus => lo,
            OperatorSign::Plus => hi,
            OperatorSign::Mean => 0.5 * (lo + hi),
        }
    }

    /// Discrete operator at every node.
    pub fn apply(&self, sign: OperatorSign, u: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.operator_at(sign, u, i)).collect()
    }

    /// Value of the frozen-policy linear operator at `node`.
    pub fn policy_value(&self, sign: OperatorSign, choice: FrameChoice, u: &[f64], node: usize) -> f64 {
        let frames = self.scheme.frames();
        let sum = |f: u16| -> f64 { frames[f as usize].iter().map(|&j| self.second_difference(u, node, j)).sum() };
        match sign {
            OperatorSign::Minus => sum(choice.lo),
            OperatorSign::Plus => sum(choice.hi),
            OperatorSign::Mean => 0.5 * (sum(choice.lo) + sum(choice.hi)),
        }
    }

    /// Diagonal weight `Σ c0` of the heaviest frame at `node`; the explicit
    /// update `u + dt·(S(u) + g)` is monotone iff `dt ≤ 1 / max_diagonal`.
    pub fn max_diagonal(&self, node: usize) -> f64 {
        self.scheme
            .frames()
            .iter()
            .map(|f| f.iter().map(|&j| self.stencil(node, j).c0).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest time step keeping the explicit update monotone at every node.
    pub fn cfl_limit(&self) -> f64 {
        (0..self.len()).map(|i| 1.0 / self.max_diagonal(i)).fold(f64::INFINITY, f64::min)
    }

    /// Samples `f` at the node positions.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let dim = self.grid.dim();
        (0..self.len()).map(|i| f(&self.grid.position(i)[..dim])).collect()
    }

    pub fn initial_choices(&self) -> Vec<FrameChoice> {
        vec![FrameChoice::default(); self.len()]
    }
}
