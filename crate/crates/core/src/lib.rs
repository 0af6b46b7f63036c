//! Truncated Laplacians `P_k^±(D²u)` (partial sums of Hessian eigenvalues) and
//! their Dirichlet problems with power nonlinearities `u^p`.
//!
//! The crate is `no_std` with `alloc`. It contains:
//!
//! - [`spectral`]: exact evaluation of eigenvalue-sum operators on small
//!   symmetric matrices, frames and random frame sampling.
//! - [`oracles`]: closed-form radial solutions, barriers and envelopes, plus a
//!   Runge-Kutta integrator for the radial first-order reduction.
//! - [`domain`]: intersections of equal-radius balls and their rasterization
//!   into node-classified grids with exact boundary arms.
//! - [`solver`]: the monotone wide-stencil scheme, Howard policy iteration,
//!   pseudo-time relaxation, Perron squeeze iterations, the superlinear
//!   normalized fixed point and principal eigenvalue estimates.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod domain;
mod error;
pub mod oracles;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
