//! Compressed sparse rows, ILU(0) and preconditioned BiCGSTAB for the
//! frozen-policy M-matrix systems.

use alloc::vec;
use alloc::vec::Vec;

/// Relative residual above which a stalled Krylov solve falls back to Gauss-Seidel.
const GS_TRIGGER: f64 = 1e-8;

#[derive(Clone, Debug)]
pub(crate) struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    diag: Vec<usize>,
}

/// Row-by-row builder; columns within a row may arrive unsorted or repeated.
pub(crate) struct CsrBuilder {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    diag: Vec<usize>,
    row: Vec<(u32, f64)>,
}

impl CsrBuilder {
    pub fn new(n: usize, nnz_hint: usize) -> Self {
        CsrBuilder {
            n,
            indptr: {
                let mut v = Vec::with_capacity(n + 1);
                v.push(0);
                v
            },
            indices: Vec::with_capacity(nnz_hint),
            values: Vec::with_capacity(nnz_hint),
            diag: Vec::with_capacity(n),
            row: Vec::new(),
        }
    }

    pub fn push(&mut self, col: u32, v: f64) {
        self.row.push((col, v));
    }

    pub fn finish_row(&mut self) {
        let i = self.indptr.len() - 1;
        self.row.push((i as u32, 0.0));
        self.row.sort_unstable_by_key(|e| e.0);
        let mut diag = usize::MAX;
        let mut last: Option<u32> = None;
        for &(c, v) in &self.row {
            if last == Some(c) {
                *self.values.last_mut().unwrap() += v;
                continue;
            }
            if c as usize == i {
                diag = self.indices.len();
            }
            self.indices.push(c);
            self.values.push(v);
            last = Some(c);
        }
        self.diag.push(diag);
        self.indptr.push(self.indices.len());
        self.row.clear();
    }

    pub fn build(self) -> Csr {
        debug_assert_eq!(self.indptr.len(), self.n + 1);
        Csr { n: self.n, indptr: self.indptr, indices: self.indices, values: self.values, diag: self.diag }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

impl Csr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for jj in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[jj] * x[self.indices[jj] as usize];
            }
            y[i] = s;
        }
    }

    fn residual(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        self.matvec(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    pub fn ilu0(&self) -> Ilu0 {
        let mut lu = self.values.clone();
        for i in 0..self.n {
            let (start, end, d) = (self.indptr[i], self.indptr[i + 1], self.diag[i]);
            for kk in start..d {
                let k = self.indices[kk] as usize;
                let pivot = lu[self.diag[k]];
                lu[kk] /= pivot;
                let lik = lu[kk];
                let krow = &self.indices[self.diag[k] + 1..self.indptr[k + 1]];
                for jj in kk + 1..end {
                    let j = self.indices[jj];
                    if let Ok(pos) = krow.binary_search(&j) {
                        lu[jj] -= lik * lu[self.diag[k] + 1 + pos];
                    }
                }
            }
        }
        Ilu0 { lu }
    }

    /// One forward Gauss-Seidel sweep.
    fn gauss_seidel(&self, b: &[f64], x: &mut [f64]) {
        for i in 0..self.n {
            let mut s = b[i];
            for jj in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[jj] as usize;
                if j != i {
                    s -= self.values[jj] * x[j];
                }
            }
            x[i] = s / self.values[self.diag[i]];
        }
    }
}

pub(crate) struct Ilu0 {
    lu: Vec<f64>,
}

impl Ilu0 {
    fn apply(&self, a: &Csr, r: &[f64], z: &mut [f64]) {
        for i in 0..a.n {
            let mut s = r[i];
            for kk in a.indptr[i]..a.diag[i] {
                s -= self.lu[kk] * z[a.indices[kk] as usize];
            }
            z[i] = s;
        }
        for i in (0..a.n).rev() {
            let mut s = z[i];
            for jj in a.diag[i] + 1..a.indptr[i + 1] {
                s -= self.lu[jj] * z[a.indices[jj] as usize];
            }
            z[i] = s / self.lu[a.diag[i]];
        }
    }
}

/// Solves `A x = b` from the initial guess in `x`: ILU(0)-preconditioned
/// BiCGSTAB, restarted on breakdown, with Gauss-Seidel sweeps as a last resort.
/// Returns the final relative residual.
pub(crate) fn solve(a: &Csr, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> f64 {
    let n = a.n;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return 0.0;
    }
    let target = rtol * bnorm;
    let ilu = a.ilu0();
    let mut r = vec![0.0; n];
    let mut r_hat = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut total = 0;

    for _restart in 0..4 {
        a.residual(b, x, &mut r);
        let mut rn = norm(&r);
        if rn <= target {
            return rn / bnorm;
        }
        r_hat.copy_from_slice(&r);
        p.iter_mut().for_each(|e| *e = 0.0);
        v.iter_mut().for_each(|e| *e = 0.0);
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        while total < max_iter {
            total += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || !rho_new.is_finite() {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            ilu.apply(a, &p, &mut p_hat);
            a.matvec(&p_hat, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 || !rv.is_finite() {
                break;
            }
            alpha = rho_new / rv;
            // r now holds s = r − α v
            for i in 0..n {
                r[i] -= alpha * v[i];
            }
            if norm(&r) <= target {
                for i in 0..n {
                    x[i] += alpha * p_hat[i];
                }
                break;
            }
            ilu.apply(a, &r, &mut s_hat);
            a.matvec(&s_hat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                break;
            }
            omega = dot(&t, &r) / tt;
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] -= omega * t[i];
            }
            rho = rho_new;
            rn = norm(&r);
            if rn <= target || omega == 0.0 {
                break;
            }
        }
        a.residual(b, x, &mut r);
        rn = norm(&r);
        if rn <= target {
            return rn / bnorm;
        }
        if total >= max_iter {
            break;
        }
    }

    // Stagnation close to the target is roundoff; only a genuine Krylov
    // failure is worth the slow sweeps.
    a.residual(b, x, &mut r);
    if norm(&r) <= GS_TRIGGER * bnorm {
        return norm(&r) / bnorm;
    }
    for _ in 0..max_iter {
        a.gauss_seidel(b, x);
        total += 1;
        if total % 16 == 0 {
            a.residual(b, x, &mut r);
            if norm(&r) <= target {
                break;
            }
        }
    }
    a.residual(b, x, &mut r);
    norm(&r) / bnorm
}
