//! Uniformly convex domains `Ω = ∩_{y∈Y} B_R(y)` and their grids.
//!
//! Grids are axis-aligned lattices `hℤⁿ` anchored at the origin, so the node
//! set at spacing `h/2` contains the node set at `h`. Near `∂Ω` the stencil arms
//! are shortened to the exact crossing with the bounding spheres
//! (Shortley-Weller), which carries the homogeneous Dirichlet condition.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Coordinates padded to three entries; unused trailing entries are zero.
pub type Point = [f64; 3];

/// Default node budget for [`rasterize`].
pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

/// Arms shorter than this fraction of `h` are floored to it.
pub const ARM_FLOOR: f64 = 1e-3;

fn pad(x: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

fn dist(a: &Point, b: &Point) -> f64 {
    libm::sqrt((0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum())
}

/// Result of a membership query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub interior: bool,
    /// `R − max_y |x − y|`; positive inside.
    pub margin: f64,
}

/// Intersection of finitely many balls of common radius `R` in dimension 2 or 3.
#[derive(Clone, Debug, PartialEq)]
pub struct CRDomain {
    radius: f64,
    dim: usize,
    centers: Vec<Point>,
    inner_point: Point,
}

impl CRDomain {
    /// Builds the domain and certifies a nonempty interior.
    pub fn new(radius: f64, centers: &[Vec<f64>]) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("radius must be positive and finite"));
        }
        let Some(first) = centers.first() else {
            return Err(invalid("domain needs at least one center"));
        };
        let dim = first.len();
        if !(2..=3).contains(&dim) {
            return Err(invalid("domain dimension must be 2 or 3"));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.len() });
        }
        if centers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite center coordinate"));
        }
        let centers: Vec<Point> = centers.iter().map(|c| pad(c)).collect();
        let mut dom = CRDomain { radius, dim, centers, inner_point: [0.0; 3] };
        dom.inner_point = dom.certify_interior()?;
        Ok(dom)
    }

    pub fn ball(radius: f64, center: &[f64]) -> Result<Self> {
        Self::new(radius, &[center.to_vec()])
    }

    pub fn unit_disk() -> Self {
        Self::ball(1.0, &[0.0, 0.0]).expect("unit disk is valid")
    }

    /// Minimax center of `Y` (Badoiu-Clarkson iteration) checked against `R`.
    fn certify_interior(&self) -> Result<Point> {
        let n = self.centers.len() as f64;
        let mut x = [0.0; 3];
        for c in &self.centers {
            for i in 0..3 {
                x[i] += c[i] / n;
            }
        }
        let mut best = x;
        let mut best_r = self.max_center_distance(&x);
        for it in 1..2000 {
            let (far, r) = self.farthest_center(&x);
            if r < best_r {
                best_r = r;
                best = x;
            }
            if best_r < self.radius - 1e-9 && it > 50 {
                break;
            }
            let step = 1.0 / (it as f64 + 1.0);
            for i in 0..3 {
                x[i] += (far[i] - x[i]) * step;
            }
        }
        if best_r < self.radius - 1e-9 {
            Ok(best)
        } else {
            Err(invalid("ball intersection has empty interior"))
        }
    }

    fn farthest_center(&self, x: &Point) -> (Point, f64) {
        let mut far = self.centers[0];
        let mut r = -1.0;
        for c in &self.centers {
            let d = dist(x, c);
            if d > r {
                r = d;
                far = *c;
            }
        }
        (far, r)
    }

    fn max_center_distance(&self, x: &Point) -> f64 {
        self.farthest_center(x).1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    /// A point certified to lie in the interior.
    pub fn inner_point(&self) -> Point {
        self.inner_point
    }

    fn point(&self, x: &[f64]) -> Result<Point> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(pad(x))
    }

    pub fn contains(&self, x: &[f64]) -> Result<Membership> {
        Ok(self.membership(&self.point(x)?))
    }

    pub fn membership(&self, x: &Point) -> Membership {
        let margin = self.radius - self.max_center_distance(x);
        Membership { interior: margin > 0.0, margin }
    }

    /// `dist(x, ∂Ω) = min_y (R − |x − y|)` for interior `x`.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        let m = self.contains(x)?;
        if !m.interior {
            return Err(invalid("boundary distance requested for an exterior point"));
        }
        Ok(m.margin)
    }

    /// The center whose sphere is closest to `x` (the active constraint).
    pub fn active_center(&self, x: &Point) -> Point {
        self.farthest_center(x).0
    }

    /// Smallest `t ∈ (0, max_len]` with `x + t e/|e|` on `∂Ω`, or `None` if the
    /// segment stays inside.
    pub fn boundary_crossing(&self, x: &[f64], e: &[f64], max_len: f64) -> Result<Option<f64>> {
        let xp = self.point(x)?;
        let ep = self.point(e)?;
        if !self.membership(&xp).interior {
            return Err(invalid("boundary crossing requested from an exterior point"));
        }
        let norm = libm::sqrt(ep.iter().map(|v| v * v).sum());
        if !(norm > 0.0) {
            return Err(invalid("direction must be nonzero"));
        }
        let d = [ep[0] / norm, ep[1] / norm, ep[2] / norm];
        let t = self.exit_distance(&xp, &d);
        Ok(if t <= max_len { Some(t) } else { None })
    }

    /// Distance along unit `d` from interior `x` to the first sphere crossing.
    fn exit_distance(&self, x: &Point, d: &Point) -> f64 {
        let r2 = self.radius * self.radius;
        let mut t_min = f64::INFINITY;
        for y in &self.centers {
            let w = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            let b: f64 = (0..3).map(|i| w[i] * d[i]).sum();
            let c: f64 = w.iter().map(|v| v * v).sum::<f64>() - r2;
            // c < 0 inside: the positive root is −b + √(b² − c)
            let disc = libm::sqrt(b * b - c);
            let t = if b > 0.0 { -c / (b + disc) } else { disc - b };
            t_min = t_min.min(t);
        }
        t_min
    }
}

/// Classification of a lattice node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Exterior,
}

/// One side of a stencil arm from an interior node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arm {
    /// Interior neighbor index, or `None` when the arm ends on `∂Ω`.
    pub neighbor: Option<u32>,
    /// Physical arm length; `h|e|` for full arms.
    pub length: f64,
}

/// Node-classified lattice over a [`CRDomain`] with per-direction arms.
#[derive(Clone, Debug)]
pub struct Grid {
    h: f64,
    dim: usize,
    lo: [i64; 3],
    shape: [usize; 3],
    box_to_node: Vec<u32>,
    nodes: Vec<[i64; 3]>,
    directions: Vec<[i64; 3]>,
    arms: Vec<Arm>,
    floored_arms: usize,
}

const EXTERIOR: u32 = u32::MAX;

/// Rasterizes with the default node budget.
pub fn rasterize(domain: &CRDomain, h: f64, directions: &[[i64; 3]]) -> Result<Grid> {
    rasterize_with_budget(domain, h, directions, DEFAULT_NODE_BUDGET)
}

pub fn rasterize_with_budget(domain: &CRDomain, h: f64, directions: &[[i64; 3]], budget: usize) -> Result<Grid> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid("grid spacing must be positive"));
    }
    let dim = domain.dim();
    for d in directions {
        if d.iter().all(|&v| v == 0) || d[dim..].iter().any(|&v| v != 0) {
            return Err(invalid("stencil direction must be nonzero and match the dimension"));
        }
    }
    let r = domain.radius();
    let mut lo = [0i64; 3];
    let mut shape = [1usize; 3];
    let mut total: usize = 1;
    for ax in 0..dim {
        let lo_c = domain.centers().iter().map(|c| c[ax] - r).fold(f64::NEG_INFINITY, f64::max);
        let hi_c = domain.centers().iter().map(|c| c[ax] + r).fold(f64::INFINITY, f64::min);
        let i_lo = libm::ceil(lo_c / h) as i64;
        let i_hi = libm::floor(hi_c / h) as i64;
        lo[ax] = i_lo;
        shape[ax] = (i_hi - i_lo + 1).max(0) as usize;
        total = total.saturating_mul(shape[ax]);
    }
    if total > budget {
        return Err(Error::ResourceLimit { nodes: total, budget });
    }

    let mut box_to_node = vec![EXTERIOR; total];
    let mut nodes = Vec::new();
    for flat in 0..total {
        let idx = unflatten(flat, &lo, &shape);
        let x = position_of(&idx, h);
        if domain.membership(&x).interior {
            box_to_node[flat] = nodes.len() as u32;
            nodes.push(idx);
        }
    }

    let mut grid = Grid {
        h,
        dim,
        lo,
        shape,
        box_to_node,
        nodes,
        directions: directions.to_vec(),
        arms: Vec::new(),
        floored_arms: 0,
    };

    let mut arms = Vec::with_capacity(grid.nodes.len() * directions.len() * 2);
    let mut floored = 0;
    for node in 0..grid.nodes.len() {
        let idx = grid.nodes[node];
        let x = position_of(&idx, h);
        for d in directions {
            let full = h * libm::sqrt(d.iter().map(|&v| (v * v) as f64).sum());
            for sign in [1i64, -1] {
                let nb = [idx[0] + sign * d[0], idx[1] + sign * d[1], idx[2] + sign * d[2]];
                if let Some(j) = grid.node_index(&nb) {
                    arms.push(Arm { neighbor: Some(j as u32), length: full });
                    continue;
                }
                let e = [(sign * d[0]) as f64, (sign * d[1]) as f64, (sign * d[2]) as f64];
                let norm = full / h;
                let unit = [e[0] / norm, e[1] / norm, e[2] / norm];
                let t = domain.exit_distance(&x, &unit).min(full);
                let length = if t < ARM_FLOOR * h {
                    floored += 1;
                    ARM_FLOOR * h
                } else {
                    t
                };
                arms.push(Arm { neighbor: None, length });
            }
        }
    }
    grid.arms = arms;
    grid.floored_arms = floored;
    Ok(grid)
}

fn unflatten(flat: usize, lo: &[i64; 3], shape: &[usize; 3]) -> [i64; 3] {
    let i0 = flat % shape[0];
    let i1 = (flat / shape[0]) % shape[1];
    let i2 = flat / (shape[0] * shape[1]);
    [lo[0] + i0 as i64, lo[1] + i1 as i64, lo[2] + i2 as i64]
}

fn position_of(idx: &[i64; 3], h: f64) -> Point {
    [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
}

impl Grid {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn directions(&self) -> &[[i64; 3]] {
        &self.directions
    }

    /// Number of arms floored to `ARM_FLOOR · h`.
    pub fn floored_arms(&self) -> usize {
        self.floored_arms
    }

    /// Integer lattice coordinates of an interior node.
    pub fn lattice_index(&self, node: usize) -> [i64; 3] {
        self.nodes[node]
    }

    pub fn position(&self, node: usize) -> Point {
        position_of(&self.nodes[node], self.h)
    }

    /// Interior node at the given lattice coordinates, if any.
    pub fn node_index(&self, idx: &[i64; 3]) -> Option<usize> {
        let mut flat = 0usize;
        let mut stride = 1usize;
        for ax in 0..3 {
            let off = idx[ax] - self.lo[ax];
            if off < 0 || off as usize >= self.shape[ax] {
                return None;
            }
            flat += off as usize * stride;
            stride *= self.shape[ax];
        }
        match self.box_to_node[flat] {
            EXTERIOR => None,
            j => Some(j as usize),
        }
    }

    /// Arm record for `(node, direction, side)`; side 0 is `+e`, side 1 is `−e`.
    pub fn arm(&self, node: usize, direction: usize, side: usize) -> Arm {
        self.arms[(node * self.directions.len() + direction) * 2 + side]
    }

    /// Every lattice node of the bounding box with its class.
    pub fn classification(&self) -> impl Iterator<Item = (Point, NodeClass)> + '_ {
        (0..self.box_to_node.len()).map(move |flat| {
            let idx = unflatten(flat, &self.lo, &self.shape);
            let class = if self.box_to_node[flat] == EXTERIOR { NodeClass::Exterior } else { NodeClass::Interior };
            (position_of(&idx, self.h), class)
        })
    }

    /// Multilinear interpolation of nodal values; exterior lattice nodes count as zero.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let mut base = [0i64; 3];
        let mut frac = [0.0; 3];
        for ax in 0..self.dim {
            let s = x[ax] / self.h;
            let f = libm::floor(s);
            base[ax] = f as i64;
            frac[ax] = s - f;
        }
        let corners = 1usize << self.dim;
        let mut acc = 0.0;
        for c in 0..corners {
            let mut idx = base;
            let mut w = 1.0;
            for ax in 0..self.dim {
                if c & (1 << ax) != 0 {
                    idx[ax] += 1;
                    w *= frac[ax];
                } else {
                    w *= 1.0 - frac[ax];
                }
            }
            if w == 0.0 {
                continue;
            }
            if let Some(j) = self.node_index(&idx) {
                acc += w * values[j];
            }
        }
        acc
    }
}
