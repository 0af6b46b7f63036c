//! Post-processing of discrete solutions: the a priori sup bound and the
//! boundary decay exponent.

use alloc::vec::Vec;

use super::scheme::Discretization;
use super::sup_norm;
use crate::domain::{CRDomain, Point};
use crate::error::{invalid, Error, Result};
use crate::oracles::apriori_bound;

/// Slack allowed above the a priori bound.
const APRIORI_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AprioriCheck {
    pub bound: f64,
    pub sup: f64,
    /// `bound − sup`; negative on failure.
    pub margin: f64,
    pub pass: bool,
}

/// Compares `sup u` with `((1−p)R²/(2k))^{1/(1−p)}`, `R` the domain's ball radius
/// (every ball of the intersection encloses the domain).
pub fn apriori_check(values: &[f64], p: f64, k: usize, domain: &CRDomain) -> Result<AprioriCheck> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("a priori bound needs 0 < p < 1"));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let bound = apriori_bound(p, k, domain.radius());
    let sup = sup_norm(values);
    Ok(AprioriCheck { bound, sup, margin: bound - sup, pass: sup <= bound + APRIORI_SLACK })
}

/// Distances from the boundary used for the fit: `samples` log-spaced values
/// in `[min_h · h, max]`.
///
/// With `drift` the model is `log u = q log d + b + c d`, which absorbs the
/// first-order variation of the smooth factor in `u ≈ d^q g(d)` and allows a
/// wider window; without it the model is the plain power law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub min_h: f64,
    pub max: f64,
    pub samples: usize,
    pub drift: bool,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { min_h: 4.0, max: 0.1, samples: 12, drift: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFit {
    /// Mean of the per-ray exponents; `None` when no ray had enough positive
    /// samples in the window.
    pub slope: Option<f64>,
    pub per_ray: Vec<f64>,
    pub samples_used: usize,
}

fn ray_directions(dim: usize, rays: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(rays);
    for j in 0..rays {
        let d = if dim == 2 {
            // offset from the axes so rays do not run along grid lines
            let th = core::f64::consts::TAU * (j as f64 + 0.37) / rays as f64;
            [libm::cos(th), libm::sin(th), 0.0]
        } else {
            // Fibonacci sphere
            let z = 1.0 - 2.0 * (j as f64 + 0.5) / rays as f64;
            let r = libm::sqrt(1.0 - z * z);
            let th = core::f64::consts::PI * (3.0 - libm::sqrt(5.0)) * j as f64;
            [r * libm::cos(th), r * libm::sin(th), z]
        };
        out.push(d);
    }
    out
}

/// Least-squares coefficient of `log d` for samples `(d, log u)`.
fn slope(samples: &[(f64, f64)], drift: bool) -> f64 {
    let m = if drift { 3 } else { 2 };
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(d, y) in samples {
        let row = [libm::log(d), 1.0, d];
        for i in 0..m {
            atb[i] += row[i] * y;
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination; the system is tiny and well posed for distinct d
    for c in 0..m {
        let piv = (c..m).max_by(|&a, &b| ata[a][c].abs().total_cmp(&ata[b][c].abs())).unwrap_or(c);
        ata.swap(c, piv);
        atb.swap(c, piv);
        for r in c + 1..m {
            let f = ata[r][c] / ata[c][c];
            for j in c..m {
                ata[r][j] -= f * ata[c][j];
            }
            atb[r] -= f * atb[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..m).rev() {
        let s: f64 = (c + 1..m).map(|j| ata[c][j] * x[j]).sum();
        x[c] = (atb[c] - s) / ata[c][c];
    }
    x[0]
}

/// Fits `u ≈ C d^q` along inward normals at `rays` boundary points, `d` the
/// distance to the boundary and `u` interpolated from the nodal values.
pub fn boundary_exponent_fit(
    disc: &Discretization,
    values: &[f64],
    domain: &CRDomain,
    window: FitWindow,
    rays: usize,
) -> Result<BoundaryFit> {
    if values.len() != disc.len() {
        return Err(Error::DimensionMismatch { expected: disc.len(), found: values.len() });
    }
    let dim = domain.dim();
    let h = disc.grid().h();
    let d_min = window.min_h * h;
    if !(d_min < window.max) || window.samples < 2 || rays == 0 {
        return Err(invalid("empty fit window"));
    }
    let x0 = domain.inner_point();
    let mut samples_used = 0;
    let mut per_ray = Vec::new();
    for e in ray_directions(dim, rays) {
        let Some(t) = domain.boundary_crossing(&x0[..dim], &e[..dim], 4.0 * domain.radius())? else {
            continue;
        };
        let mut y = [0.0; 3];
        for ax in 0..dim {
            y[ax] = x0[ax] + t * e[ax];
        }
        let c = domain.active_center(&y);
        let mut nrm = [0.0; 3];
        for ax in 0..dim {
            nrm[ax] = (c[ax] - y[ax]) / domain.radius();
        }
        let mut pairs = Vec::with_capacity(window.samples);
        for s in 0..window.samples {
            let d = d_min * libm::pow(window.max / d_min, s as f64 / (window.samples - 1) as f64);
            let mut x = [0.0; 3];
            for ax in 0..dim {
                x[ax] = y[ax] + d * nrm[ax];
            }
            let u = disc.grid().interpolate(values, &x[..dim]);
            if u > 0.0 {
                pairs.push((d, libm::log(u)));
            }
        }
        if pairs.len() >= if window.drift { 4 } else { 3 } {
            per_ray.push(slope(&pairs, window.drift));
            samples_used += pairs.len();
        }
    }
    let slope = if per_ray.is_empty() { None } else { Some(per_ray.iter().sum::<f64>() / per_ray.len() as f64) };
    Ok(BoundaryFit { slope, per_ray, samples_used })
}
