//! Howard policy iteration for `F(D²u) = f` with zero boundary values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::explicit::{pseudo_time_linear, PseudoTimeOptions};
use super::scheme::{Discretization, FrameChoice, BOUNDARY};
use super::sparse::{self, Csr, CsrBuilder};
use super::{sup_norm, DiscreteState, HistoryEntry, Monotonicity, OperatorSign};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearOptions {
    /// Accept when `sup|F(D²u) − f| ≤ tol · (1 + sup|f|)`.
    pub tol: f64,
    /// Relative 2-norm tolerance of each frozen-policy Krylov solve.
    pub krylov_tol: f64,
    pub max_krylov: usize,
    /// Budget of frozen-policy solves before a cycle is assumed.
    pub max_policy: usize,
    /// Pseudo-time fallback used when the policy loop does not settle.
    pub fallback: PseudoTimeOptions,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions {
            tol: 1e-9,
            krylov_tol: 1e-12,
            max_krylov: 4000,
            max_policy: 200,
            fallback: PseudoTimeOptions::default(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Player {
    Lo,
    Hi,
}

/// Matrix of `−L` for the frozen policy, where `L` is the linear operator the
/// chosen frames define. Every such matrix is an irreducibly diagonally
/// dominant M-matrix: no set of nodes is closed under its chosen arms, since
/// `|x|²` cannot be maximized over such a set.
fn assemble(disc: &Discretization, sign: OperatorSign, choices: &[FrameChoice]) -> Csr {
    let frames = disc.scheme().frames();
    let k = disc.k();
    let mut b = CsrBuilder::new(disc.len(), disc.len() * (1 + 4 * k));
    for (i, c) in choices.iter().enumerate() {
        let mut add = |frame: u16, w: f64| {
            for &j in &frames[frame as usize] {
                let s = disc.stencil(i, j);
                b.push(i as u32, w * s.c0);
                if s.plus != BOUNDARY {
                    b.push(s.plus, -w * s.cp);
                }
                if s.minus != BOUNDARY {
                    b.push(s.minus, -w * s.cm);
                }
            }
        };
        match sign {
            OperatorSign::Minus => add(c.lo, 1.0),
            OperatorSign::Plus => add(c.hi, 1.0),
            OperatorSign::Mean => {
                add(c.lo, 0.5);
                add(c.hi, 0.5);
            }
        }
        b.finish_row();
    }
    b.build()
}

/// Re-chooses one player's frames; returns whether any node changed.
fn improve(disc: &Discretization, u: &[f64], choices: &mut [FrameChoice], player: Player, eps: f64) -> bool {
    let mut changed = false;
    for (i, c) in choices.iter_mut().enumerate() {
        let best = disc.choose_frames(u, i, Some(*c), eps);
        match player {
            Player::Lo if best.lo != c.lo => {
                c.lo = best.lo;
                changed = true;
            }
            Player::Hi if best.hi != c.hi => {
                c.hi = best.hi;
                changed = true;
            }
            _ => {}
        }
    }
    changed
}

fn residual(disc: &Discretization, sign: OperatorSign, f: &[f64], u: &[f64]) -> f64 {
    (0..disc.len()).map(|i| (disc.operator_at(sign, u, i) - f[i]).abs()).fold(0.0, f64::max)
}

/// Solves `F(D²u) = f` in the interior with `u = 0` on the boundary.
///
/// For `Minus` and `Plus` this is plain Howard iteration on the frame choice.
/// For `Mean` the maximizing frame is the outer player and the minimizing
/// frame is re-optimized to convergence for each outer choice (Hoffman-Karp).
/// If the frozen-policy budget is exhausted the solve continues by explicit
/// pseudo-time stepping with frozen forcing.
pub fn linear_dirichlet_solve(
    disc: &Discretization,
    sign: OperatorSign,
    f: &[f64],
    init: Option<&[f64]>,
    opts: &LinearOptions,
) -> Result<DiscreteState> {
    let n = disc.len();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.len() });
    }
    if let Some(u0) = init {
        if u0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u0.len() });
        }
    }
    let fsup = sup_norm(f);
    if fsup == 0.0 {
        return Ok(DiscreteState {
            values: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            monotonicity: Monotonicity::Unknown,
            converged: true,
            history: Vec::new(),
        });
    }
    let b: Vec<f64> = f.iter().map(|v| -v).collect();
    let mut u = match init {
        Some(u0) => u0.to_vec(),
        None => vec![0.0; n],
    };
    let eps = 1e-11 * fsup;
    let mut choices: Vec<FrameChoice> = (0..n).map(|i| disc.choose_frames(&u, i, None, 0.0)).collect();
    let (inner, outer) = match sign {
        OperatorSign::Minus => (Player::Lo, None),
        OperatorSign::Plus => (Player::Hi, None),
        OperatorSign::Mean => (Player::Lo, Some(Player::Hi)),
    };

    let mut history = Vec::new();
    let mut solves = 0usize;
    let mut settled = false;
    'outer: loop {
        loop {
            if solves >= opts.max_policy {
                break 'outer;
            }
            let a = assemble(disc, sign, &choices);
            let rel = sparse::solve(&a, &b, &mut u, opts.krylov_tol, opts.max_krylov);
            solves += 1;
            history.push(HistoryEntry { iter: solves, residual: rel, sup: sup_norm(&u) });
            if !improve(disc, &u, &mut choices, inner, eps) {
                break;
            }
        }
        match outer {
            Some(player) if improve(disc, &u, &mut choices, player, eps) => continue,
            _ => {
                settled = true;
                break;
            }
        }
    }

    let mut res = residual(disc, sign, f, &u);
    let target = opts.tol * (1.0 + fsup);
    if !settled || res > target {
        let fb = pseudo_time_linear(disc, sign, f, Some(&u), &opts.fallback)?;
        history.extend(fb.history.iter().map(|h| HistoryEntry { iter: solves + h.iter, ..*h }));
        u = fb.values;
        res = residual(disc, sign, f, &u);
        if res > target {
            return Err(Error::NonConvergence {
                iterations: solves + fb.iterations,
                residual: res,
                detail: format!("policy iteration did not settle after {solves} solves; pseudo-time fallback stalled"),
            });
        }
        solves += fb.iterations;
    }
    Ok(DiscreteState {
        values: u,
        iterations: solves,
        residual: res,
        monotonicity: Monotonicity::Unknown,
        converged: true,
        history,
    })
}
