//! Small dense linear-algebra kernels used by the solvers.
//!
//! Everything here is column-major and sized for the tall-skinny shapes
//! that show up in weighted least squares (m up to a few thousand rows,
//! n up to a few dozen columns).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense column-major complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self { rows, cols: columns.len(), data }
    }

    /// Builds a matrix from a row-major closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.rows + i] = v;
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// `self^H * y`.
    pub fn adjoint_mul_vec(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.rows);
        (0..self.cols).map(|j| cdot(self.col(j), y)).collect()
    }

    /// `self^H * self`.
    pub fn gram(&self) -> CMatrix {
        let n = self.cols;
        CMatrix::from_fn(n, n, |i, j| cdot(self.col(i), self.col(j)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Dense column-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// `self^T * y`.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), y)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Conjugated inner product `a^H b`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cnorm2(a: &[Complex64]) -> f64 {
    // scaled to avoid overflow/underflow on tiny weighted columns
    let scale = a.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = a.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Returns `None` when a non-positive pivot is met.
    pub fn factor(a: &Matrix) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols());
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l.get(j, k) * l.get(j, k);
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let ljj = diag.sqrt();
            l.set(j, j, ljj);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / ljj);
            }
        }
        Some(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        y
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns `None` for a (numerically) singular matrix.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, m.get(i, k).abs()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pmax == 0.0 || !pmax.is_finite() {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(p, j));
                m.set(p, j, t);
            }
            x.swap(k, p);
        }
        let piv = m.get(k, k);
        for i in k + 1..n {
            let f = m.get(i, k) / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                let v = m.get(i, j) - f * m.get(k, j);
                m.set(i, j, v);
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m.get(i, j) * x[j];
        }
        x[i] = s / m.get(i, i);
    }
    Some(x)
}

/// Result of orthogonalizing one vector against an orthonormal set.
pub(crate) struct Projection {
    pub coeffs: Vec<Complex64>,
    pub residual_norm: f64,
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// `v` is overwritten by its component orthogonal to `basis`; the returned
/// coefficients are the accumulated projections from both passes.
pub(crate) fn orthogonalize(basis: &[Vec<Complex64>], v: &mut [Complex64]) -> Projection {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.len()];
    for _pass in 0..2 {
        for (q, c) in basis.iter().zip(coeffs.iter_mut()) {
            let h = cdot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= h * qi;
            }
            *c += h;
        }
    }
    Projection { coeffs, residual_norm: cnorm2(v) }
}
