//! Closed-form radial solutions, barriers and envelopes for
//! `F(D²u) + u^p = 0`, and the radial first-order reduction
//! `k u'(r)/r + f(u(r)) = 0`.
//!
//! Radial functions `x ↦ u(|x − c|)` have Hessian eigenvalues `u''(r)` (once,
//! radial direction) and `u'(r)/r` (`n − 1` times, tangential directions). On
//! convex-decreasing profiles `u'/r ≤ u''`, so `P_k^-` with `k < n` only sees the
//! tangential eigenvalue and becomes the first-order operator `k u'/r`.

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{CRDomain, Point};
use crate::error::{invalid, Result};
use crate::spectral::{SpectralOperator, SymMat};

/// `(u, u', u'')` at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialValue {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

/// A scalar profile `r ↦ u(r)` with first and second derivatives.
pub trait RadialProfile {
    fn eval(&self, r: f64) -> RadialValue;

    /// Largest radius where the profile is defined (may be infinite).
    fn r_max(&self) -> f64 {
        f64::INFINITY
    }
}

/// `[c (R² − r²)]^q` for `r < R`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCap {
    pub coeff: f64,
    pub radius: f64,
    pub exponent: f64,
}

impl RadialProfile for PowerCap {
    fn eval(&self, r: f64) -> RadialValue {
        let (c, q) = (self.coeff, self.exponent);
        let base = c * (self.radius * self.radius - r * r);
        if base <= 0.0 {
            return RadialValue { u: 0.0, du: 0.0, d2u: 0.0 };
        }
        let u = libm::pow(base, q);
        let g1 = if q == 1.0 { 1.0 } else { libm::pow(base, q - 1.0) };
        let du = -2.0 * c * r * q * g1;
        let g2 = if q == 2.0 {
            1.0
        } else if q == 1.0 {
            0.0
        } else {
            libm::pow(base, q - 2.0)
        };
        let d2u = q * (q - 1.0) * g2 * 4.0 * c * c * r * r - 2.0 * c * q * g1;
        RadialValue { u, du, d2u }
    }

    fn r_max(&self) -> f64 {
        self.radius
    }
}

/// `exp(−r²/(2k))`, the radial solution of `P_k^-(D²u) + u = 0` in `ℝⁿ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianProfile {
    pub k: f64,
}

impl RadialProfile for GaussianProfile {
    fn eval(&self, r: f64) -> RadialValue {
        let u = libm::exp(-r * r / (2.0 * self.k));
        RadialValue { u, du: -(r / self.k) * u, d2u: u * (r * r / (self.k * self.k) - 1.0 / self.k) }
    }
}

/// Hessian eigenvalues of `x ↦ u(|x|)` in `ℝⁿ` at radius `r`: `u''(r)` once and
/// `u'(r)/r` with multiplicity `n − 1` (unsorted). At `r = 0` the limit
/// `u''(0)` is returned `n` times.
pub fn radial_hessian_eigs<P: RadialProfile + ?Sized>(profile: &P, r: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if !(r >= 0.0) {
        return Err(invalid("radius must be nonnegative"));
    }
    let v = profile.eval(r);
    if r == 0.0 {
        return Ok(vec![v.d2u; n]);
    }
    let mut e = vec![v.du / r; n];
    e[0] = v.d2u;
    Ok(e)
}

/// A radial profile centered at a point of `ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialFunction<P> {
    pub profile: P,
    pub center: Point,
    pub dim: usize,
}

impl<P: RadialProfile> RadialFunction<P> {
    pub fn new(profile: P, center: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&center.len()) {
            return Err(invalid("center must have 2 or 3 coordinates"));
        }
        let mut c = [0.0; 3];
        c[..center.len()].copy_from_slice(center);
        Ok(RadialFunction { profile, center: c, dim: center.len() })
    }

    fn offset(&self, x: &[f64]) -> (Point, f64) {
        let mut d = [0.0; 3];
        for i in 0..self.dim {
            d[i] = x[i] - self.center[i];
        }
        (d, libm::sqrt(d.iter().map(|v| v * v).sum()))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.profile.eval(self.offset(x).1).u
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (d, r) = self.offset(x);
        if r == 0.0 {
            return vec![0.0; self.dim];
        }
        let du = self.profile.eval(r).du;
        (0..self.dim).map(|i| du * d[i] / r).collect()
    }

    /// Full Hessian `u'' r̂⊗r̂ + (u'/r)(I − r̂⊗r̂)`.
    pub fn hessian(&self, x: &[f64]) -> Result<SymMat> {
        let (d, r) = self.offset(x);
        let v = self.profile.eval(r);
        let mut h = SymMat::zeros(self.dim)?;
        if r == 0.0 {
            for i in 0..self.dim {
                h.set(i, i, v.d2u);
            }
            return Ok(h);
        }
        let tang = v.du / r;
        for i in 0..self.dim {
            for j in i..self.dim {
                let rr = d[i] * d[j] / (r * r);
                let delta = if i == j { 1.0 } else { 0.0 };
                h.set(i, j, v.d2u * rr + tang * (delta - rr));
            }
        }
        Ok(h)
    }
}

/// Pointwise residual `F(D²u(x)) + a·u(x)^p` through the assembled Hessian.
pub fn pde_residual<P: RadialProfile>(
    func: &RadialFunction<P>,
    op: &SpectralOperator,
    p: f64,
    x: &[f64],
) -> Result<f64> {
    let hess = func.hessian(x)?;
    let u = func.value(x).max(0.0);
    Ok(op.apply(&hess)? + libm::pow(u, p))
}

fn check_sublinear(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(alloc::format!("exponent p = {p} outside (0, 1): no positive (sub)solution exists for p ≥ 1")))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(invalid("k must be at least 1"))
    } else {
        Ok(())
    }
}

/// Profile `[(1−p)/(2k) (r² − |x|²)]^{1/(1−p)}`.
pub fn power_cap(p: f64, k: usize, radius: f64) -> PowerCap {
    PowerCap { coeff: (1.0 - p) / (2.0 * k as f64), radius, exponent: 1.0 / (1.0 - p) }
}

/// Classical positive solution of `P_k^-(D²u) + u^p = 0` in `B_R(center)`.
pub fn ball_solution(p: f64, k: usize, radius: f64, center: &[f64]) -> Result<RadialFunction<PowerCap>> {
    check_sublinear(p)?;
    check_k(k)?;
    if k > center.len() {
        return Err(invalid("k exceeds the dimension"));
    }
    if !(radius > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    RadialFunction::new(power_cap(p, k, radius), center)
}

/// Compactly supported `C¹` solution supported on `B_r(x0)`; the caller is
/// responsible for `B_r(x0) ⊆ Ω`.
pub fn bump_solution(p: f64, k: usize, r: f64, x0: &[f64]) -> Result<RadialFunction<PowerCap>> {
    ball_solution(p, k, r, x0)
}

/// Limit profile of the rescaled ball solutions as `p → 1`.
pub fn gaussian_limit_profile(k: usize) -> Result<GaussianProfile> {
    check_k(k)?;
    Ok(GaussianProfile { k: k as f64 })
}

/// `M_p = ((1−p)/(2k))^{1/(1−p)}`, the maximum of the unit-ball solution.
pub fn unit_ball_max(p: f64, k: usize) -> f64 {
    libm::pow((1.0 - p) / (2.0 * k as f64), 1.0 / (1.0 - p))
}

/// Rescaled unit-ball solution `U_p(M_p^{(1−p)/2} x)/M_p = (1 − (1−p)|x|²/(2k))_+^{1/(1−p)}`.
pub fn rescaled_ball_profile(p: f64, k: usize, r: f64) -> f64 {
    let base = 1.0 - (1.0 - p) * r * r / (2.0 * k as f64);
    if base <= 0.0 {
        0.0
    } else {
        libm::pow(base, 1.0 / (1.0 - p))
    }
}

/// Upper bound `((1−p) R²/(2k))^{1/(1−p)}` for subsolutions on `Ω ⊆ B_R`.
pub fn apriori_bound(p: f64, k: usize, radius: f64) -> f64 {
    libm::pow((1.0 - p) * radius * radius / (2.0 * k as f64), 1.0 / (1.0 - p))
}

/// `τ = (R^{2p}/(2k))^{1/(1−p)}`, the amplitude of the quadratic `P_k^+` barriers.
pub fn pplus_tau(p: f64, k: usize, radius: f64) -> f64 {
    libm::pow(libm::pow(radius, 2.0 * p) / (2.0 * k as f64), 1.0 / (1.0 - p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeMode {
    Inf,
    Sup,
}

/// Pointwise inf or sup of a family of radial caps.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFunction {
    pub mode: EnvelopeMode,
    pub members: Vec<RadialFunction<PowerCap>>,
}

impl EnvelopeFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        let it = self.members.iter().map(|m| m.value(x));
        match self.mode {
            EnvelopeMode::Inf => it.fold(f64::INFINITY, f64::min),
            EnvelopeMode::Sup => it.fold(0.0, f64::max),
        }
    }
}

/// `inf_y [(1−p)/(2k)(R² − |x−y|²)]^{1/(1−p)}`: Lipschitz supersolution vanishing on `∂Ω`.
pub fn supersolution_envelope(domain: &CRDomain, p: f64, k: usize) -> Result<EnvelopeFunction> {
    check_sublinear(p)?;
    check_k(k)?;
    let dim = domain.dim();
    let members = domain
        .centers()
        .iter()
        .map(|c| RadialFunction::new(power_cap(p, k, domain.radius()), &c[..dim]))
        .collect::<Result<Vec<_>>>()?;
    if members.is_empty() {
        return Err(invalid("empty center set"));
    }
    Ok(EnvelopeFunction { mode: EnvelopeMode::Inf, members })
}

/// `sup_z` of bumps of radius `δ_z = dist(z, ∂Ω)` centered at the sample
/// points `z`; exterior samples are skipped.
pub fn subsolution_envelope(domain: &CRDomain, p: f64, k: usize, samples: &[Point]) -> Result<EnvelopeFunction> {
    check_sublinear(p)?;
    check_k(k)?;
    let dim = domain.dim();
    let mut members = Vec::with_capacity(samples.len());
    for z in samples {
        let m = domain.membership(z);
        if m.interior {
            members.push(RadialFunction::new(power_cap(p, k, m.margin), &z[..dim])?);
        }
    }
    if members.is_empty() {
        return Err(invalid("no interior sample points for the subsolution envelope"));
    }
    Ok(EnvelopeFunction { mode: EnvelopeMode::Sup, members })
}

/// `inf_y τ(R² − |x−y|²)`: supersolution of `P_k^+(D²u) + u^p = 0` vanishing on `∂Ω`.
pub fn pplus_supersolution(domain: &CRDomain, p: f64, k: usize) -> Result<EnvelopeFunction> {
    check_sublinear(p)?;
    check_k(k)?;
    let r = domain.radius();
    let cap = PowerCap { coeff: pplus_tau(p, k, r), radius: r, exponent: 1.0 };
    let dim = domain.dim();
    let members = domain.centers().iter().map(|c| RadialFunction::new(cap, &c[..dim])).collect::<Result<Vec<_>>>()?;
    Ok(EnvelopeFunction { mode: EnvelopeMode::Inf, members })
}

/// Profile produced by [`integrate_radial_ode`], tabulated on the RK4 nodes
/// and evaluated by cubic Hermite interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedProfile {
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    d2u: Vec<f64>,
    zero: Option<f64>,
}

impl TabulatedProfile {
    /// First radius where the solution reaches zero, if it does before `r_max`.
    pub fn first_zero(&self) -> Option<f64> {
        self.zero
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }
}

impl RadialProfile for TabulatedProfile {
    fn eval(&self, r: f64) -> RadialValue {
        let n = self.r.len();
        if r >= self.r[n - 1] {
            return RadialValue { u: self.u[n - 1], du: self.du[n - 1], d2u: self.d2u[n - 1] };
        }
        let i = match self.r.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(i) => return RadialValue { u: self.u[i], du: self.du[i], d2u: self.d2u[i] },
            Err(i) => i.max(1) - 1,
        };
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (u0, u1, m0, m1) = (self.u[i], self.u[i + 1], self.du[i] * h, self.du[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let u =
            (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * m1;
        let du = ((6.0 * t2 - 6.0 * t) * u0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * u1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let d2u = self.d2u[i] + t * (self.d2u[i + 1] - self.d2u[i]);
        RadialValue { u, du, d2u }
    }

    fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }
}

/// Integrates `u' = −(r/k) f(u)`, `u(0) = u0`, with classical fixed-step RK4,
/// clamping at `u = 0`. The first zero is located by repeated step halving.
///
/// `f` must be nonnegative at 0 and nondecreasing; both are checked on samples.
pub fn integrate_radial_ode<F: Fn(f64) -> f64>(
    f: F,
    u0: f64,
    k: usize,
    r_max: f64,
    step: f64,
) -> Result<TabulatedProfile> {
    check_k(k)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid("step must be positive"));
    }
    if !(u0 >= 0.0) || !(r_max > 0.0) {
        return Err(invalid("need u0 ≥ 0 and r_max > 0"));
    }
    let top = if u0 > 0.0 { u0 } else { 1.0 };
    let mut prev = f(0.0);
    if !(prev >= 0.0) {
        return Err(invalid("f(0) must be nonnegative"));
    }
    for i in 1..=256 {
        let v = f(top * i as f64 / 256.0);
        if !(v >= prev - 1e-14 * libm::fabs(prev).max(1.0)) {
            return Err(invalid("f is decreasing somewhere on [0, u0]"));
        }
        prev = v;
    }

    let kf = k as f64;
    let rhs = |r: f64, u: f64| -(r / kf) * f(u.max(0.0));
    let rk4 = |r: f64, u: f64, h: f64| {
        let k1 = rhs(r, u);
        let k2 = rhs(r + 0.5 * h, u + 0.5 * h * k1);
        let k3 = rhs(r + 0.5 * h, u + 0.5 * h * k2);
        let k4 = rhs(r + h, u + h * k3);
        u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };

    let mut rs = vec![0.0];
    let mut us = vec![u0];
    let mut zero = if u0 == 0.0 { Some(0.0) } else { None };
    let mut r = 0.0;
    let mut u = u0;
    let steps = libm::ceil(r_max / step) as usize;
    for i in 1..=steps {
        let r_next = (i as f64 * step).min(r_max);
        if zero.is_some() {
            rs.push(r_next);
            us.push(0.0);
            continue;
        }
        let u_next = rk4(r, u, r_next - r);
        if u_next > 0.0 {
            r = r_next;
            u = u_next;
            rs.push(r);
            us.push(u);
            continue;
        }
        // event: refine toward the first zero with halved sub-steps
        let mut h = 0.5 * (r_next - r);
        while h > 1e-13 * r_next.max(1.0) {
            let trial = rk4(r, u, h);
            if trial > 0.0 && r + h < r_next {
                r += h;
                u = trial;
                rs.push(r);
                us.push(u);
            } else {
                h *= 0.5;
            }
        }
        zero = Some(r + h);
        rs.push(r + h);
        us.push(0.0);
        if r + h < r_next {
            rs.push(r_next);
            us.push(0.0);
        }
    }

    let du: Vec<f64> = rs.iter().zip(&us).map(|(&r, &u)| if u > 0.0 { rhs(r, u) } else { 0.0 }).collect();
    let n = rs.len();
    let mut d2u = vec![0.0; n];
    for i in 0..n {
        if us[i] <= 0.0 {
            continue;
        }
        d2u[i] = if i == 0 {
            -f(u0) / kf
        } else if i + 1 < n {
            let (a, b) = (rs[i] - rs[i - 1], rs[i + 1] - rs[i]);
            // second-order derivative of du on a nonuniform stencil
            (du[i + 1] * a * a - du[i - 1] * b * b + du[i] * (b * b - a * a)) / (a * b * (a + b))
        } else {
            (du[i] - du[i - 1]) / (rs[i] - rs[i - 1])
        };
    }
    Ok(TabulatedProfile { r: rs, u: us, du, d2u, zero })
}
