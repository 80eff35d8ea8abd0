//! Sparse symmetric positive-definite solves and symmetric eigenvalues.
//!
//! Matrices here come from triangle meshes whose vertices are numbered ring by
//! ring or row by row, so a variable-band (skyline) Cholesky factorization has
//! small profile and is both exact and cheap.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("requested {requested} eigenvalues but the operator has dimension {dim}")]
    TooManyEigenvalues { requested: usize, dim: usize },
}

/// Symmetric matrix assembled from (row, col, value) triplets; only the lower
/// triangle is kept.
#[derive(Debug, Clone, Default)]
pub struct SymmetricBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Add `v` at (i, j); the symmetric partner is implied.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v;
            }
        }
        m
    }

    pub fn to_csr(&self) -> SparseSym {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSym { n: self.n, row_ptr, cols, vals }
    }

    pub fn factor(&self) -> Result<SkylineCholesky, LinalgError> {
        SkylineCholesky::factor(&self.to_csr())
    }
}

/// Full symmetric matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }
}

/// Variable-band Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    /// first column stored for each row
    first: Vec<usize>,
    /// offset of row i's first stored entry in `data`
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &SparseSym) -> Result<Self, LinalgError> {
        let n = a.n;
        let mut first = vec![0; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = a.row(i).map(|(j, _)| j).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let ri = &data[start[i] + lo - fi..start[i] + j - fi];
                let rj = &data[start[j] + lo - fj..start[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                if j == i {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(LinalgError::NotPositiveDefinite { row: i, pivot: s });
                    }
                    data[start[i] + i - fi] = s.sqrt();
                } else {
                    let djj = data[start[j] + j - fj];
                    data[start[i] + j - fi] = s / djj;
                }
            }
        }
        Ok(Self { n, first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.start[i] + j - self.first[i]]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // forward: L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            let s: f64 = row.iter().zip(&b[fi..i]).map(|(l, y)| l * y).sum();
            b[i] = (b[i] - s) / self.at(i, i);
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            b[i] /= self.at(i, i);
            let xi = b[i];
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i] + i - fi];
            for (k, l) in row.iter().enumerate() {
                b[fi + k] -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Number of stored factor entries.
    pub fn profile(&self) -> usize {
        self.data.len()
    }
}

/// The `k` smallest eigenvalues of the pencil `S u = μ M u` for symmetric `S`
/// and positive diagonal `M`.
///
/// Small problems are solved densely. Larger ones use Lanczos with full
/// reorthogonalization on the shift-inverted operator `(S − σM)⁻¹M`, with
/// `σ` below the spectrum so the shifted matrix factors by Cholesky.
pub fn smallest_generalized_eigenvalues(
    stiffness: &SymmetricBuilder,
    mass: &[f64],
    k: usize,
) -> Result<Vec<f64>, LinalgError> {
    let n = stiffness.dim();
    if k > n || k == 0 {
        return Err(LinalgError::TooManyEigenvalues { requested: k, dim: n });
    }
    if n <= 400 {
        return Ok(dense_generalized(stiffness, mass, k));
    }
    let s = stiffness.to_csr();
    // Gershgorin lower bound for the spectrum of M^{-1/2} S M^{-1/2}
    let mut lower = f64::INFINITY;
    for i in 0..n {
        let mut diag = 0.0;
        let mut off = 0.0;
        for (j, v) in s.row(i) {
            if j == i {
                diag += v;
            } else {
                off += v.abs() / (mass[i] * mass[j]).sqrt();
            }
        }
        lower = lower.min(diag / mass[i] - off);
    }
    // Bisect between the Gershgorin bound (factorable) and a Rayleigh
    // quotient (not below the smallest eigenvalue) so the shift sits just
    // under the bottom of the spectrum; Cholesky success decides each step.
    let shifted_factor = |sigma: f64| {
        let mut b = stiffness.clone();
        for (i, m) in mass.iter().enumerate() {
            b.add(i, i, -sigma * m);
        }
        b.factor()
    };
    let mut lo = lower - 1e-2 * (1.0 + lower.abs());
    let mut chol = shifted_factor(lo)?;
    let ones = vec![1.0; n];
    let mut hi = dot(&s.mul_vec(&ones), &ones) / mass.iter().sum::<f64>();
    for _ in 0..24 {
        if hi - lo <= 1e-3 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match shifted_factor(mid) {
            Ok(f) => {
                lo = mid;
                chol = f;
            }
            Err(_) => hi = mid,
        }
    }
    let sigma = lo;

    // Work in the M-inner product with y = M^{1/2} x, giving the symmetric
    // operator T = M^{1/2} (S − σM)^{-1} M^{1/2} whose largest eigenvalues are 1/(μ − σ).
    let sqrt_m: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut w: Vec<f64> = v.iter().zip(&sqrt_m).map(|(a, b)| a * b).collect();
        chol.solve_in_place(&mut w);
        w.iter_mut().zip(&sqrt_m).for_each(|(a, b)| *a *= b);
        w
    };

    let max_steps = n.min(400).max(k + 20);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    // deterministic start vector
    let mut q: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7548776662).sin()).collect();
    normalize(&mut q);
    let mut prev_ritz: Option<Vec<f64>> = None;
    for step in 0..max_steps {
        let mut w = apply(&q);
        let a = dot(&w, &q);
        alpha.push(a);
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let bnorm = dot(&w, &w).sqrt();
        let m = alpha.len();
        if m >= k && (step % 5 == 4 || bnorm < 1e-12) {
            let ritz = tridiagonal_largest(&alpha, &beta, k);
            let converged = match &prev_ritz {
                Some(p) => p
                    .iter()
                    .zip(&ritz)
                    .all(|(a, b)| (a - b).abs() <= 1e-13 * b.abs().max(1e-300)),
                None => false,
            };
            if converged || bnorm < 1e-12 {
                return Ok(ritz.iter().map(|t| sigma + 1.0 / t).collect());
            }
            prev_ritz = Some(ritz);
        }
        if bnorm < 1e-12 {
            break;
        }
        beta.push(bnorm);
        q = w.into_iter().map(|x| x / bnorm).collect();
    }
    beta.truncate(alpha.len().saturating_sub(1));
    let ritz = tridiagonal_largest(&alpha, &beta, k);
    Ok(ritz.iter().map(|t| sigma + 1.0 / t).collect())
}

fn tridiagonal_largest(alpha: &[f64], beta: &[f64], k: usize) -> Vec<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m && i < beta.len() {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev.truncate(k);
    ev
}

/// Dense generalized eigenvalues, ascending. Used for small problems and as a test oracle.
pub fn dense_generalized(stiffness: &SymmetricBuilder, mass: &[f64], k: usize) -> Vec<f64> {
    let mut a = stiffness.to_dense();
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] /= (mass[i] * mass[j]).sqrt();
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.truncate(k);
    ev
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += c * xi);
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}
