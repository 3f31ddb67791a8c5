//! Weighted least-squares inner problem and the derivatives of the dual
//! objective `d(w) = min_a sum_j w_j |f_j - p_a(x_j)|^2`.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{lu_solve, CMatrix, Matrix};
use crate::orthobasis::{weighted_basis, WeightedBasis};
use crate::problem::{BasisSpec, Mode, Problem, Scalar, WeightVector};

/// Below this ratio `sqrt(w_j) / max sqrt(w)` the support residual is taken
/// from the recurrence instead of dividing by `sqrt(w_j)`.
const DIVIDE_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct WlsSolution {
    pub basis: WeightedBasis,
    /// Coefficients in the orthonormal weighted basis.
    pub atilde: Vec<Scalar>,
    /// Residual `f - p` over all original nodes.
    pub r: Vec<Scalar>,
    /// Dual value `sum_j w_j |r_j|^2`.
    pub d: f64,
    pub w_used: WeightVector,
    pub mode: Mode,
}

impl WlsSolution {
    pub fn support(&self) -> &[usize] {
        self.basis.support()
    }

    pub fn r_inf(&self) -> f64 {
        self.r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Fitted values `f - r` at every node.
    pub fn fitted(&self, problem: &Problem) -> Vec<Scalar> {
        problem.values().iter().zip(&self.r).map(|(f, r)| f - r).collect()
    }
}

/// Solves the weighted least-squares problem for weights `w`.
pub fn solve_wls(problem: &Problem, w: &WeightVector) -> Result<WlsSolution> {
    let basis = weighted_basis(problem, w)?;
    let support = basis.support().to_vec();
    let sqrt_w = basis.sqrt_w();
    let f = problem.values();

    let weighted_f: Vec<Complex64> = support.iter().map(|&i| f[i] * sqrt_w[i]).collect();
    let atilde = basis.q().adjoint_mul_vec(&weighted_f);
    let qa = basis.q().mul_vec(&atilde);

    let max_sqrt = support.iter().map(|&i| sqrt_w[i]).fold(0.0, f64::max);
    let mut r = vec![Complex64::new(0.0, 0.0); problem.m()];
    let mut need_eval = support.len() < problem.m();
    let mut on_support = vec![false; problem.m()];
    for (k, &i) in support.iter().enumerate() {
        if sqrt_w[i] >= DIVIDE_FLOOR * max_sqrt {
            r[i] = (weighted_f[k] - qa[k]) / sqrt_w[i];
            on_support[i] = true;
        } else {
            need_eval = true;
        }
    }
    if need_eval {
        let p = basis.values_at_nodes(problem, &atilde)?;
        for i in 0..problem.m() {
            if !on_support[i] {
                r[i] = f[i] - p[i];
            }
        }
    }
    if problem.mode() == Mode::Real {
        r.iter_mut().for_each(|z| z.im = 0.0);
    }
    let d = support.iter().map(|&i| w.as_slice()[i] * r[i].norm_sqr()).sum();
    Ok(WlsSolution { basis, atilde, r, d, w_used: w.clone(), mode: problem.mode() })
}

/// `grad d(w) = [|r_1|^2, ..., |r_m|^2]`.
pub fn dual_gradient(sol: &WlsSolution) -> Vec<f64> {
    sol.r.iter().map(|z| z.norm_sqr()).collect()
}

/// Low-rank factor of the dual Hessian on the weight support.
///
/// `K^r = Re(Q^H R)`, `K^i = Im(Q^H R)` with `R = diag(r)`, and
/// `-hess d = 2 W^-1/2 K^T K W^-1/2`. Real mode keeps `K^r` only.
#[derive(Clone, Debug)]
pub struct HessianFactor {
    pub k: Matrix,
    pub n: usize,
    pub mode: Mode,
}

impl HessianFactor {
    pub fn real_block(&self) -> Matrix {
        Matrix::from_fn(self.n, self.k.cols(), |i, j| self.k.get(i, j))
    }

    pub fn imag_block(&self) -> Option<Matrix> {
        (self.mode == Mode::Complex)
            .then(|| Matrix::from_fn(self.n, self.k.cols(), |i, j| self.k.get(self.n + i, j)))
    }
}

pub fn hessian_factor(sol: &WlsSolution) -> HessianFactor {
    let q = sol.basis.q();
    let n = q.cols();
    let support = sol.support();
    let rows = match sol.mode {
        Mode::Real => n,
        Mode::Complex => 2 * n,
    };
    let mut k = Matrix::zeros(rows, support.len());
    for (j, &i) in support.iter().enumerate() {
        let rj = sol.r[i];
        for l in 0..n {
            let v = q.get(j, l).conj() * rj;
            k.set(l, j, v.re);
            if sol.mode == Mode::Complex {
                k.set(n + l, j, v.im);
            }
        }
    }
    HessianFactor { k, n, mode: sol.mode }
}

/// Dense Hessian over the support, formed from the raw basis as
/// `-2 Re(R^H Psi (Psi^H W Psi)^-1 Psi^H R)`.
///
/// Independent of the orthonormal basis; meant for small problems and
/// diagnostics because the monomial Gram matrix is ill-conditioned.
pub fn hessian_dense(problem: &Problem, sol: &WlsSolution) -> Matrix {
    let support = sol.support();
    let s = support.len();
    let w = sol.w_used.as_slice();
    let x = problem.nodes();
    let psi = match problem.basis() {
        BasisSpec::Monomial(n) => CMatrix::from_fn(s, *n, |i, j| x[support[i]].powu(j as u32)),
        BasisSpec::Explicit(full) => CMatrix::from_fn(s, full.cols(), |i, j| full.get(support[i], j)),
    };
    let n = psi.cols();
    // G = Psi^H W Psi, embedded as a real 2n x 2n system
    let g = CMatrix::from_fn(n, n, |a, b| {
        (0..s).map(|i| psi.get(i, a).conj() * psi.get(i, b) * w[support[i]]).sum()
    });
    let embed = Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = g.get(ii, jj);
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    // X = G^-1 Psi^H R, one column per support node
    let mut xcols: Vec<Vec<Complex64>> = Vec::with_capacity(s);
    for j in 0..s {
        let rj = sol.r[support[j]];
        let rhs: Vec<Complex64> = (0..n).map(|a| psi.get(j, a).conj() * rj).collect();
        let mut stacked: Vec<f64> = rhs.iter().map(|z| z.re).collect();
        stacked.extend(rhs.iter().map(|z| z.im));
        let sol_r = lu_solve(&embed, &stacked).unwrap_or_else(|| vec![f64::NAN; 2 * n]);
        xcols.push((0..n).map(|a| Complex64::new(sol_r[a], sol_r[n + a])).collect());
    }
    let mut h = Matrix::zeros(s, s);
    for i in 0..s {
        let ri = sol.r[support[i]].conj();
        for j in 0..s {
            let v: Complex64 = (0..n).map(|a| psi.get(i, a) * xcols[j][a]).sum();
            h.set(i, j, -2.0 * (ri * v).re);
        }
    }
    h
}

/// `-hess d` rebuilt from the low-rank factor, `2 W^-1/2 K^T K W^-1/2`.
pub fn neg_hessian_from_factor(sol: &WlsSolution, k: &HessianFactor) -> Matrix {
    let support = sol.support();
    let w = sol.w_used.as_slice();
    let s = support.len();
    Matrix::from_fn(s, s, |i, j| {
        let kk = crate::linalg::dot(k.k.col(i), k.k.col(j));
        2.0 * kk / (w[support[i]] * w[support[j]]).sqrt()
    })
}
