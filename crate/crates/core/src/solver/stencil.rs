use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

pub const MAX_DIRECTIONS: usize = 128;
pub const MAX_FRAMES: usize = 256;

/// Lattice directions and orthogonal `k`-frames of a wide stencil.
///
/// Directions are the primitive integer vectors with max-norm at most `order`,
/// one representative per antipodal pair (first nonzero coordinate positive).
/// Frames are the `k`-subsets of directions that are pairwise orthogonal as
/// integer vectors, so orthogonality is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilScheme {
    dim: usize,
    order: i64,
    k: usize,
    directions: Vec<[i64; 3]>,
    frames: Vec<Vec<usize>>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn dot(a: &[i64; 3], b: &[i64; 3]) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl StencilScheme {
    pub fn new(dim: usize, order: usize, k: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(invalid("stencil dimension must be 2 or 3"));
        }
        if order == 0 {
            return Err(invalid("stencil order must be at least 1"));
        }
        if k == 0 || k > dim {
            return Err(Error::Configuration(alloc::format!("no orthogonal {k}-frame exists in dimension {dim}")));
        }
        let s = order as i64;
        let range = |ax: usize| if ax < dim { -s..=s } else { 0..=0 };
        let mut directions = Vec::new();
        for a in range(0) {
            for b in range(1) {
                for c in range(2) {
                    let v = [a, b, c];
                    let first = v.iter().copied().find(|&x| x != 0);
                    let Some(first) = first else { continue };
                    if first < 0 || gcd(gcd(a, b), c) != 1 {
                        continue;
                    }
                    directions.push(v);
                }
            }
        }
        directions.sort_by(|x, y| dot(x, x).cmp(&dot(y, y)).then(y.cmp(x)));

        let mut frames = Vec::new();
        let mut current = Vec::with_capacity(k);
        collect_frames(&directions, k, 0, &mut current, &mut frames);
        if directions.len() > MAX_DIRECTIONS || frames.len() > MAX_FRAMES {
            return Err(Error::Configuration(alloc::format!(
                "stencil of order {order} is too wide ({} directions, {} frames)",
                directions.len(),
                frames.len()
            )));
        }
        if frames.is_empty() {
            return Err(Error::Configuration(alloc::format!("stencil of order {order} has no orthogonal {k}-frame")));
        }
        Ok(StencilScheme { dim, order: s, k, directions, frames })
    }

    /// Default order. For `k = n` every frame sums to a consistent Laplacian
    /// and a small stencil suffices (2 in 2D, 1 in 3D). For `k < n` the frame
    /// extremes must resolve the extreme eigendirections, whose angular error
    /// enters the operator at leading order, so wider stencils are used
    /// (6 in 2D, 2 in 3D).
    pub fn default_for(dim: usize, k: usize) -> Result<Self> {
        let order = match (dim, k == dim) {
            (2, true) => 2,
            (2, false) => 6,
            (_, true) => 1,
            (_, false) => 2,
        };
        Self::new(dim, order, k)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn directions(&self) -> &[[i64; 3]] {
        &self.directions
    }

    /// Frames as lists of direction indices; the axis frame comes first.
    pub fn frames(&self) -> &[Vec<usize>] {
        &self.frames
    }

    /// `|e|²` of a direction.
    pub fn norm2(&self, direction: usize) -> i64 {
        let d = &self.directions[direction];
        dot(d, d)
    }
}

fn collect_frames(dirs: &[[i64; 3]], k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..dirs.len() {
        if current.iter().all(|&j| dot(&dirs[i], &dirs[j]) == 0) {
            current.push(i);
            collect_frames(dirs, k, i + 1, current, out);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_2d_order_two() {
        let s = StencilScheme::new(2, 2, 1).unwrap();
        let mut dirs: Vec<(i64, i64)> = s.directions().iter().map(|d| (d[0], d[1])).collect();
        dirs.sort();
        let mut expected = vec![(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)];
        expected.sort();
        assert_eq!(dirs, expected);
        assert_eq!(s.frames().len(), 8);
    }

    #[test]
    fn pair_frames_2d() {
        let s = StencilScheme::new(2, 2, 2).unwrap();
        assert_eq!(s.frames().len(), 4);
        assert_eq!(s.frames()[0], vec![0, 1]);
        for f in s.frames() {
            assert_eq!(f.len(), 2);
            assert_eq!(dot(&s.directions()[f[0]], &s.directions()[f[1]]), 0);
        }
    }

    #[test]
    fn three_d_frames() {
        let s = StencilScheme::new(3, 1, 3).unwrap();
        assert_eq!(s.directions().len(), 13);
        assert!(s.frames().iter().any(|f| f == &vec![0, 1, 2]));
        assert!(StencilScheme::new(3, 1, 4).is_err());
        assert!(StencilScheme::new(2, 0, 1).is_err());
    }

    #[test]
    fn defaults_cover_every_k() {
        for dim in 2..=3 {
            for k in 1..=dim {
                let s = StencilScheme::default_for(dim, k).unwrap();
                assert_eq!(s.k(), k);
                assert!(s.frames().iter().all(|f| f.len() == k));
            }
        }
    }
}
