//! Eigenvalue-sum operators on small dense symmetric matrices.
//!
//! Everything here is exact up to the cyclic Jacobi eigenvalue routine, which
//! is accurate to a few ulps of `‖X‖` for the supported dimensions. These
//! routines are the ground truth that the grid scheme in [`crate::solver`] is
//! checked against.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

/// Orthonormality tolerance for [`Frame`].
pub const FRAME_TOL: f64 = 1e-10;

fn check_dim(n: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(invalid(alloc::format!("matrix dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")))
    }
}

/// Dense real symmetric matrix of order 2..=6.
///
/// Entries are stored row-major; every mutation writes both `(i, j)` and
/// `(j, i)` so the storage is exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    n: usize,
    a: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SymMat { n, a: vec![0.0; n * n] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_diag(d: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(d.len())?;
        for (i, &v) in d.iter().enumerate() {
            m.a[i * m.n + i] = v;
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries; the input must be exactly symmetric.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        check_dim(n)?;
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        for i in 0..n {
            for j in i + 1..n {
                let (x, y) = (entries[i * n + j], entries[j * n + i]);
                if x != y && !(x.is_nan() && y.is_nan()) {
                    return Err(invalid(alloc::format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(SymMat { n, a: entries.to_vec() })
    }

    /// Parses whitespace-separated row-major entries (the text fixture format).
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for tok in text.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| invalid(alloc::format!("bad entry `{tok}`")))?;
            entries.push(v);
        }
        let n = libm::sqrt(entries.len() as f64) as usize;
        if n * n != entries.len() {
            return Err(invalid(alloc::format!("{} entries is not a square count", entries.len())));
        }
        Self::from_row_major(n, &entries)
    }

    /// Tensor product `ζ ⊗ ζ`.
    pub fn outer(z: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(z.len())?;
        for i in 0..m.n {
            for j in 0..m.n {
                m.a[i * m.n + j] = z[i] * z[j];
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.a
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }

    /// `⟨Xζ, ζ⟩`.
    pub fn quad_form(&self, z: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            let xi: f64 = row.iter().zip(z).map(|(a, b)| a * b).sum();
            s += z[i] * xi;
        }
        s
    }

    pub fn scaled(&self, t: f64) -> Self {
        SymMat { n: self.n, a: self.a.iter().map(|v| v * t).collect() }
    }

    pub fn add(&self, other: &SymMat) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMat) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &SymMat, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(SymMat { n: self.n, a: self.a.iter().zip(&other.a).map(|(&a, &b)| f(a, b)).collect() })
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_sorted(self)
    }

    /// Spectral norm `max |λ_i|`.
    pub fn norm(&self) -> Result<f64> {
        let e = self.eigenvalues()?;
        Ok(libm::fabs(e[0]).max(libm::fabs(e[self.n - 1])))
    }

    /// Symmetric matrix with independent standard Gaussian entries on and above the diagonal.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.sample(StandardNormal);
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// Random positive semidefinite matrix `Σ_i ζ_i ⊗ ζ_i` with Gaussian `ζ_i`.
    pub fn random_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for _ in 0..n {
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            m = m.add(&Self::outer(&z)?)?;
        }
        Ok(m)
    }
}

/// Eigenvalues of `x` in nondecreasing order, by cyclic Jacobi rotations.
pub fn eigenvalues_sorted(x: &SymMat) -> Result<Vec<f64>> {
    if x.a.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let n = x.n;
    let mut a = x.a.clone();
    let frob: f64 = a.iter().map(|v| v * v).sum();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-34 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if libm::fabs(theta) > 1e150 {
                    0.5 / theta
                } else {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// An eigenvalue-sum operator `F: S^n → ℝ`.
///
/// Every variant is positively 1-homogeneous and degenerate elliptic.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralOperator {
    /// `P_k^-`: sum of the `k` smallest eigenvalues.
    MinusK(usize),
    /// `P_k^+`: sum of the `k` largest eigenvalues.
    PlusK(usize),
    /// `Σ α_i λ_i` with `α_i ≥ 0`, `Σ α_i = 1`.
    WeightedSum(Vec<f64>),
    /// `Σ λ_{j_i}` over 1-based eigenvalue ranks `j_1 < … < j_k`.
    PartialSum(Vec<usize>),
    MaxOf(Vec<SpectralOperator>),
    MinOf(Vec<SpectralOperator>),
    /// Arithmetic mean of the listed operators.
    Mean(Vec<SpectralOperator>),
}

impl SpectralOperator {
    /// Checks the operator is well formed for matrices of order `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        use SpectralOperator::*;
        match self {
            MinusK(k) | PlusK(k) => {
                if *k == 0 || *k > n {
                    return Err(invalid(alloc::format!("k = {k} outside [1, {n}]")));
                }
            }
            WeightedSum(w) => {
                if w.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: w.len() });
                }
                if w.iter().any(|&a| !(a >= 0.0)) {
                    return Err(invalid("weights must be nonnegative"));
                }
                let s: f64 = w.iter().sum();
                if libm::fabs(s - 1.0) > 1e-12 {
                    return Err(invalid(alloc::format!("weights sum to {s}, not 1")));
                }
            }
            PartialSum(idx) => {
                if idx.is_empty() || idx.iter().any(|&j| j == 0 || j > n) {
                    return Err(invalid("partial-sum ranks must lie in [1, n]"));
                }
                if idx.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("partial-sum ranks must be strictly increasing"));
                }
            }
            MaxOf(list) | MinOf(list) | Mean(list) => {
                if list.is_empty() {
                    return Err(invalid("empty operator family"));
                }
                for op in list {
                    op.validate(n)?;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &SymMat) -> Result<f64> {
        self.validate(x.dim())?;
        let eig = eigenvalues_sorted(x)?;
        Ok(self.apply_to_spectrum(&eig))
    }

    /// Evaluates on an already sorted spectrum; no validation.
    pub fn apply_to_spectrum(&self, eig: &[f64]) -> f64 {
        use SpectralOperator::*;
        let n = eig.len();
        match self {
            MinusK(k) => eig[..*k].iter().sum(),
            PlusK(k) => eig[n - *k..].iter().sum(),
            WeightedSum(w) => w.iter().zip(eig).map(|(a, l)| a * l).sum(),
            PartialSum(idx) => idx.iter().map(|&j| eig[j - 1]).sum(),
            MaxOf(list) => list.iter().map(|op| op.apply_to_spectrum(eig)).fold(f64::NEG_INFINITY, f64::max),
            MinOf(list) => list.iter().map(|op| op.apply_to_spectrum(eig)).fold(f64::INFINITY, f64::min),
            Mean(list) => list.iter().map(|op| op.apply_to_spectrum(eig)).sum::<f64>() / list.len() as f64,
        }
    }
}

/// `F(X)`; convenience wrapper over [`SpectralOperator::apply`].
pub fn apply_operator(op: &SpectralOperator, x: &SymMat) -> Result<f64> {
    op.apply(x)
}

/// A set of `k` mutually orthonormal vectors in `ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    vectors: Vec<Vec<f64>>,
}

impl Frame {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(invalid("frame must contain at least one vector"));
        };
        let n = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        if vectors.len() > n {
            return Err(invalid("more frame vectors than the space dimension"));
        }
        let mut defect: f64 = 0.0;
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate().skip(i) {
                let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max(libm::fabs(d - target));
            }
        }
        if defect > FRAME_TOL {
            return Err(Error::NonOrthonormalFrame { defect });
        }
        Ok(Frame { vectors })
    }

    /// First `k` coordinate axes of `ℝⁿ`.
    pub fn axes(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid("frame size must lie in [1, n]"));
        }
        Ok(Frame {
            vectors: (0..k)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect(),
        })
    }

    /// Gram-Schmidt on standard Gaussian draws (rotation-invariant frame sampling).
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid("frame size must lie in [1, n]"));
        }
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        while vectors.len() < k {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for u in &vectors {
                    let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= d * ui;
                    }
                }
            }
            let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            if norm < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            vectors.push(v);
        }
        Ok(Frame { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

/// `Σ_i ⟨X ζ_i, ζ_i⟩` over the frame; always lies in `[P_k^-(X), P_k^+(X)]`.
pub fn frame_sum(x: &SymMat, frame: &Frame) -> Result<f64> {
    if frame.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: frame.dim() });
    }
    Ok(frame.vectors.iter().map(|z| x.quad_form(z)).sum())
}

/// Monte-Carlo estimates of the inf and sup of [`frame_sum`] over random
/// `k`-frames. The estimates are clipped to the exact `P_k^∓(X)` so rounding
/// in the frame sums never crosses the true extremes.
pub fn sample_inf_sup<R: Rng + ?Sized>(x: &SymMat, k: usize, n_samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    let n = x.dim();
    let eig = eigenvalues_sorted(x)?;
    if k == 0 || k > n {
        return Err(invalid("k outside [1, n]"));
    }
    let exact_lo = SpectralOperator::MinusK(k).apply_to_spectrum(&eig);
    let exact_hi = SpectralOperator::PlusK(k).apply_to_spectrum(&eig);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let f = Frame::random(n, k, rng)?;
        let s = frame_sum(x, &f)?;
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo.max(exact_lo), hi.min(exact_hi)))
}

/// `P_k^-(0 + ζ⊗ζ) − P_k^-(0)`: zero whenever `k < n`, witnessing the lack of
/// strict ellipticity along `ζ`.
pub fn degeneracy_witness(k: usize, n: usize, zeta: &[f64]) -> Result<f64> {
    if zeta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: zeta.len() });
    }
    if k == 0 || k >= n {
        return Err(invalid("degeneracy witness needs 1 ≤ k < n; for k = n the operator is uniformly elliptic"));
    }
    let op = SpectralOperator::MinusK(k);
    let base = SymMat::zeros(n)?;
    Ok(op.apply(&base.add(&SymMat::outer(zeta)?)?)? - op.apply(&base)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let x = SymMat::from_diag(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(eigenvalues_sorted(&x).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rank_one_spectrum() {
        let x = SymMat::outer(&[3.0, 4.0]).unwrap();
        let e = eigenvalues_sorted(&x).unwrap();
        assert!(e[0].abs() < 1e-12);
        assert!((e[1] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let x = SymMat::from_diag(&[1.0, f64::NAN]).unwrap();
        assert!(matches!(eigenvalues_sorted(&x), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dimension_bounds() {
        assert!(SymMat::zeros(1).is_err());
        assert!(SymMat::zeros(7).is_err());
        assert!(SymMat::zeros(6).is_ok());
    }

    #[test]
    fn asymmetric_input_rejected() {
        assert!(SymMat::from_row_major(2, &[1.0, 2.0, 2.5, 1.0]).is_err());
    }

    #[test]
    fn parse_fixture() {
        let x = SymMat::parse("2 1 0\n1 2 0\n0 0 5\n").unwrap();
        let e = x.eigenvalues().unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14 && e[2] == 5.0);
        assert!(SymMat::parse("1 2 3").is_err());
    }

    #[test]
    fn truncated_laplacians_on_diagonals() {
        let x = SymMat::from_diag(&[-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(SpectralOperator::MinusK(2).apply(&x).unwrap(), -1.0);
        assert_eq!(SpectralOperator::PlusK(2).apply(&x).unwrap(), 2.0);
        assert_eq!(
            SpectralOperator::PlusK(2).apply(&x).unwrap(),
            -SpectralOperator::MinusK(2).apply(&x.scaled(-1.0)).unwrap()
        );
        let id = SymMat::identity(3).unwrap();
        assert_eq!(SpectralOperator::MinusK(2).apply(&id).unwrap(), 2.0);
    }

    #[test]
    fn max_of_pairs_example() {
        let x = SymMat::from_diag(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let f = SpectralOperator::MaxOf(vec![
            SpectralOperator::PartialSum(vec![1, 4]),
            SpectralOperator::PartialSum(vec![2, 3]),
        ]);
        assert_eq!(f.apply(&x).unwrap(), 5.0);
    }

    #[test]
    fn operator_validation() {
        let x = SymMat::identity(3).unwrap();
        assert!(SpectralOperator::MinusK(4).apply(&x).is_err());
        assert!(SpectralOperator::MinusK(0).apply(&x).is_err());
        assert!(SpectralOperator::PartialSum(vec![2, 2]).apply(&x).is_err());
        assert!(SpectralOperator::PartialSum(vec![0]).apply(&x).is_err());
        assert!(SpectralOperator::WeightedSum(vec![0.5, 0.5, 0.5]).apply(&x).is_err());
        assert!(SpectralOperator::WeightedSum(vec![0.5, 0.5]).apply(&x).is_err());
        assert!(SpectralOperator::MaxOf(vec![]).apply(&x).is_err());
        let w = SpectralOperator::WeightedSum(vec![0.2, 0.3, 0.5]);
        assert!((w.apply(&x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_sums() {
        let x = SymMat::from_diag(&[5.0, 7.0, -1.0]).unwrap();
        assert_eq!(frame_sum(&x, &Frame::axes(3, 2).unwrap()).unwrap(), 12.0);
        assert_eq!(frame_sum(&x, &Frame::axes(3, 3).unwrap()).unwrap(), x.trace());
        assert!(matches!(Frame::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]), Err(Error::NonOrthonormalFrame { .. })));
        assert!(Frame::new(vec![vec![1.1, 0.0]]).is_err());
    }

    #[test]
    fn random_frames_respect_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = SymMat::random(3, &mut rng).unwrap();
        let lo = SpectralOperator::MinusK(2).apply(&x).unwrap();
        let hi = SpectralOperator::PlusK(2).apply(&x).unwrap();
        let mut min = f64::INFINITY;
        for _ in 0..10_000 {
            let f = Frame::random(3, 2, &mut rng).unwrap();
            let s = frame_sum(&x, &f).unwrap();
            assert!(s <= hi + 1e-12);
            min = min.min(s);
        }
        assert!(min >= lo - 1e-12);
    }

    #[test]
    fn sampled_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id = SymMat::identity(3).unwrap();
        assert_eq!(sample_inf_sup(&id, 2, 5, &mut rng).unwrap(), (2.0, 2.0));

        let x = SymMat::outer(&[1.0, -2.0, 0.5]).unwrap();
        let (lo, _) = sample_inf_sup(&x, 1, 100, &mut rng).unwrap();
        assert!(lo >= 0.0);
        assert!(sample_inf_sup(&x, 1, 0, &mut rng).is_err());
    }

    #[test]
    fn witness() {
        assert_eq!(degeneracy_witness(1, 2, &[0.0, 1.0]).unwrap(), 0.0);
        assert!(degeneracy_witness(2, 3, &[0.3, -1.2, 2.0]).unwrap().abs() < 1e-12);
        assert!(degeneracy_witness(2, 2, &[1.0, 0.0]).is_err());
    }
}
