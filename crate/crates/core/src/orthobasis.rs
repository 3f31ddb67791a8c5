//! Orthonormal weighted bases.
//!
//! For a monomial space the basis is produced by the Arnoldi process on the
//! Krylov space `K_n(diag(x), sqrt(w))`, which is the orthonormal factor of
//! `sqrt(W) V` without ever forming the Vandermonde matrix `V`. The
//! Hessenberg recurrence coefficients are kept so the fitted function can be
//! evaluated anywhere by running the recurrence again on new nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cnorm2, orthogonalize, CMatrix};
use crate::problem::{BasisSpec, Problem, Scalar, WeightVector};

/// Relative breakdown threshold for the Arnoldi residual.
const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisSource {
    Arnoldi,
    ExplicitQr,
}

/// Orthonormal basis of `sqrt(W) Psi` restricted to the weight support.
///
/// Rows of `q` are indexed by position in `support`; nodes with zero weight
/// carry no row.
#[derive(Clone, Debug)]
pub struct WeightedBasis {
    q: CMatrix,
    /// `n x (n-1)` Hessenberg block: `x . q_k = sum_{i <= k+1} h[i,k] q_i`.
    h: Option<CMatrix>,
    support: Vec<usize>,
    sqrt_w: Vec<f64>,
    /// Upper-triangular factor of `sqrt(W) Psi = Q R` (explicit bases only).
    r: Option<CMatrix>,
    /// Value of the first (constant) basis function, `1 / ||sqrt(w)||`.
    s1: f64,
    source: BasisSource,
}

impl WeightedBasis {
    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn hessenberg(&self) -> Option<&CMatrix> {
        self.h.as_ref()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `sqrt(w_i)` over all original indices.
    pub fn sqrt_w(&self) -> &[f64] {
        &self.sqrt_w
    }

    pub fn source(&self) -> BasisSource {
        self.source
    }

    pub fn dim(&self) -> usize {
        self.q.cols()
    }

    pub fn first_value(&self) -> f64 {
        self.s1
    }

    /// Serializable recurrence for evaluation elsewhere.
    pub fn recurrence(&self) -> Result<Recurrence> {
        let h = self.h.clone().ok_or(Error::NoRecurrence)?;
        Ok(Recurrence { first_value: self.s1, h })
    }

    /// `max |Q^H Q - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let g = self.q.gram();
        let n = g.rows();
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((g.get(i, j) - target).norm());
            }
        }
        e
    }

    /// Values of the fitted function at every original node: the recurrence
    /// for Arnoldi bases, `Psi R^-1 a` for explicit ones.
    pub fn values_at_nodes(&self, problem: &Problem, coeffs: &[Scalar]) -> Result<Vec<Scalar>> {
        match (&self.h, &self.r, problem.basis()) {
            (Some(_), _, _) => self.recurrence()?.evaluate(coeffs, problem.nodes()),
            (None, Some(r), BasisSpec::Explicit(psi)) => {
                let n = coeffs.len();
                let mut a = coeffs.to_vec();
                for i in (0..n).rev() {
                    let mut s = a[i];
                    for j in i + 1..n {
                        s -= r.get(i, j) * a[j];
                    }
                    a[i] = s / r.get(i, i);
                }
                Ok(psi.mul_vec(&a))
            }
            _ => Err(Error::NoRecurrence),
        }
    }

    /// Values of the fitted function `Q a / sqrt(w)` at the support nodes.
    pub fn support_values(&self, coeffs: &[Scalar]) -> Vec<Scalar> {
        let qa = self.q.mul_vec(coeffs);
        qa.iter()
            .zip(&self.support)
            .map(|(v, &i)| v / self.sqrt_w[i])
            .collect()
    }
}

/// Hessenberg recurrence of an Arnoldi basis: enough to evaluate the fitted
/// function at arbitrary nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub first_value: f64,
    pub h: CMatrix,
}

impl Recurrence {
    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// Basis function values at `v`, one column per basis function. Runs
    /// `s_{k+1} = (v . s_k - sum_{i<=k} h[i,k] s_i) / h[k+1,k]`.
    pub fn basis_at(&self, v: &[Scalar]) -> Result<CMatrix> {
        let n = self.dim();
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        cols.push(vec![Complex64::new(self.first_value, 0.0); v.len()]);
        for k in 0..n.saturating_sub(1) {
            let sub = self.h.get(k + 1, k);
            if sub == Complex64::new(0.0, 0.0) {
                return Err(Error::DivisionByZeroSubdiagonal(k));
            }
            let mut next: Vec<Complex64> = v.iter().zip(&cols[k]).map(|(x, s)| x * s).collect();
            for (i, c) in cols.iter().enumerate().take(k + 1) {
                let hik = self.h.get(i, k);
                for (nv, s) in next.iter_mut().zip(c) {
                    *nv -= hik * s;
                }
            }
            let inv = sub.inv();
            next.iter_mut().for_each(|z| *z *= inv);
            cols.push(next);
        }
        Ok(CMatrix::from_columns(v.len(), &cols))
    }

    pub fn evaluate(&self, coeffs: &[Scalar], v: &[Scalar]) -> Result<Vec<Scalar>> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidConfig(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        Ok(self.basis_at(v)?.mul_vec(coeffs))
    }
}

fn sqrt_weights(problem: &Problem, w: &WeightVector) -> Result<(Vec<usize>, Vec<f64>)> {
    if w.len() != problem.m() {
        return Err(Error::InvalidWeights(format!(
            "weight length {} does not match m = {}",
            w.len(),
            problem.m()
        )));
    }
    let support = w.support();
    if support.len() < problem.n() {
        return Err(Error::BreakdownRankDeficient(support.len()));
    }
    Ok((support, w.as_slice().iter().map(|v| v.sqrt()).collect()))
}

/// Arnoldi process on `K_n(diag(x), sqrt(w))`, modified Gram-Schmidt with
/// one reorthogonalization pass.
pub fn weighted_arnoldi(problem: &Problem, w: &WeightVector) -> Result<WeightedBasis> {
    let n = match problem.basis() {
        BasisSpec::Monomial(n) => *n,
        BasisSpec::Explicit(_) => return Err(Error::NeedsMonomialBasis),
    };
    let (support, sqrt_w) = sqrt_weights(problem, w)?;
    let x: Vec<Complex64> = support.iter().map(|&i| problem.nodes()[i]).collect();
    let xscale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut first: Vec<Complex64> = support.iter().map(|&i| Complex64::new(sqrt_w[i], 0.0)).collect();
    let norm = cnorm2(&first);
    first.iter_mut().for_each(|z| *z /= norm);
    let mut cols = vec![first];
    let mut h = CMatrix::zeros(n, n.saturating_sub(1));

    for k in 0..n.saturating_sub(1) {
        let mut v: Vec<Complex64> = x.iter().zip(&cols[k]).map(|(a, b)| a * b).collect();
        let proj = orthogonalize(&cols, &mut v);
        if proj.residual_norm < BREAKDOWN_TOL * xscale {
            return Err(Error::BreakdownRankDeficient(k + 1));
        }
        for (i, c) in proj.coeffs.iter().enumerate() {
            h.set(i, k, *c);
        }
        h.set(k + 1, k, Complex64::new(proj.residual_norm, 0.0));
        let inv = 1.0 / proj.residual_norm;
        v.iter_mut().for_each(|z| *z *= inv);
        cols.push(v);
    }

    Ok(WeightedBasis {
        q: CMatrix::from_columns(support.len(), &cols),
        h: Some(h),
        support,
        sqrt_w,
        r: None,
        s1: 1.0 / norm,
        source: BasisSource::Arnoldi,
    })
}

/// Thin QR of `sqrt(W) Psi` for an explicit basis matrix.
pub fn explicit_weighted_qr(problem: &Problem, w: &WeightVector) -> Result<WeightedBasis> {
    let psi = match problem.basis() {
        BasisSpec::Explicit(psi) => psi,
        BasisSpec::Monomial(_) => {
            return Err(Error::InvalidConfig("explicit QR needs an explicit basis matrix".into()))
        }
    };
    let (support, sqrt_w) = sqrt_weights(problem, w)?;
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(psi.cols());
    let mut r = CMatrix::zeros(psi.cols(), psi.cols());
    for j in 0..psi.cols() {
        let mut v: Vec<Complex64> = support.iter().map(|&i| psi.get(i, j) * sqrt_w[i]).collect();
        let scale = cnorm2(&v);
        if scale == 0.0 {
            return Err(Error::RankDeficientBasis);
        }
        let proj = orthogonalize(&cols, &mut v);
        if proj.residual_norm <= 1e-12 * scale {
            return Err(Error::RankDeficientBasis);
        }
        for (i, c) in proj.coeffs.iter().enumerate() {
            r.set(i, j, *c);
        }
        r.set(j, j, Complex64::new(proj.residual_norm, 0.0));
        let inv = 1.0 / proj.residual_norm;
        v.iter_mut().for_each(|z| *z *= inv);
        cols.push(v);
    }
    let norm = cnorm2(&support.iter().map(|&i| Complex64::new(sqrt_w[i], 0.0)).collect::<Vec<_>>());
    Ok(WeightedBasis {
        q: CMatrix::from_columns(support.len(), &cols),
        h: None,
        support,
        sqrt_w,
        r: Some(r),
        s1: 1.0 / norm,
        source: BasisSource::ExplicitQr,
    })
}

/// Builds the weighted basis appropriate to the problem's basis spec.
pub fn weighted_basis(problem: &Problem, w: &WeightVector) -> Result<WeightedBasis> {
    match problem.basis() {
        BasisSpec::Monomial(_) => weighted_arnoldi(problem, w),
        BasisSpec::Explicit(_) => explicit_weighted_qr(problem, w),
    }
}

/// Evaluates the fitted function `sum_k a_k s_k(v)` at new nodes.
pub fn evaluate_at(basis: &WeightedBasis, coeffs: &[Scalar], v: &[Scalar]) -> Result<Vec<Scalar>> {
    basis.recurrence()?.evaluate(coeffs, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Mode;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn dimension_one_is_sqrt_w() {
        let p = Problem::real(&[-1.0, 0.0, 2.0], &[1.0, 2.0, 3.0], BasisSpec::Monomial(1)).unwrap();
        let w = WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let b = weighted_arnoldi(&p, &w).unwrap();
        for (k, &wi) in w.as_slice().iter().enumerate() {
            assert!((b.q().get(k, 0).re - wi.sqrt()).abs() < 1e-15);
        }
        let vals = evaluate_at(&b, &[c(2.5)], &[c(7.0), c(-3.0)]).unwrap();
        assert!(vals.iter().all(|v| (v.re - 2.5).abs() < 1e-14));
    }

    #[test]
    fn hand_gram_schmidt_three_nodes() {
        let p = Problem::real(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], BasisSpec::Monomial(2)).unwrap();
        let w = WeightVector::new(vec![0.25, 0.5, 0.25]).unwrap();
        let b = weighted_arnoldi(&p, &w).unwrap();
        // weighted mean of x is zero, so column 2 is sqrt(w) . x normalized
        let raw = [-0.5, 0.0, 0.5];
        let nrm = (raw.iter().map(|v: &f64| v * v).sum::<f64>()).sqrt();
        for i in 0..3 {
            assert!((b.q().get(i, 1).re.abs() - (raw[i] / nrm).abs()).abs() < 1e-15);
        }
        assert!(b.orthogonality_error() < 1e-14);
    }

    #[test]
    fn support_values_match_recurrence() {
        let xs: Vec<f64> = (0..12).map(|i| -1.0 + i as f64 * 0.17).collect();
        let fs: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let p = Problem::real(&xs, &fs, BasisSpec::Monomial(5)).unwrap();
        let w = WeightVector::new((1..=12).map(|i| i as f64).collect()).unwrap();
        let b = weighted_arnoldi(&p, &w).unwrap();
        let a: Vec<Scalar> = (0..5).map(|k| c(1.0 / (k + 1) as f64)).collect();
        let direct = b.support_values(&a);
        let rec = evaluate_at(&b, &a, p.nodes()).unwrap();
        for (d, r) in direct.iter().zip(&rec) {
            assert!((d - r).norm() < 1e-10);
        }
    }

    #[test]
    fn recurrence_reproduces_krylov_relation() {
        let xs: Vec<Scalar> = (0..9).map(|k| Scalar::from_polar(1.0, 0.3 * k as f64)).collect();
        let fs = xs.clone();
        let p = Problem::new(xs.clone(), fs, BasisSpec::Monomial(4), Mode::Complex).unwrap();
        let b = weighted_arnoldi(&p, &WeightVector::uniform(9)).unwrap();
        let h = b.hessenberg().unwrap();
        for k in 0..3 {
            for r in 0..9 {
                let lhs = xs[r] * b.q().get(r, k);
                let rhs: Scalar = (0..=k + 1).map(|i| h.get(i, k) * b.q().get(r, i)).sum();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn breakdown_when_support_too_small() {
        let p = Problem::real(&[0.0, 1.0, 2.0, 3.0], &[0.0; 4], BasisSpec::Monomial(3)).unwrap();
        let w = WeightVector::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(weighted_arnoldi(&p, &w), Err(Error::BreakdownRankDeficient(_))));
    }

    #[test]
    fn explicit_identity_columns() {
        // m = n + 1: columns e_1, e_2 of a 3-node problem
        let cols = vec![vec![c(1.0), c(0.0), c(0.0)], vec![c(0.0), c(1.0), c(0.0)]];
        let psi = CMatrix::from_columns(3, &cols);
        let p = Problem::real(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], BasisSpec::Explicit(psi)).unwrap();
        let b = explicit_weighted_qr(&p, &WeightVector::uniform(3)).unwrap();
        assert!((b.q().get(0, 0).re - 1.0).abs() < 1e-15);
        assert!((b.q().get(1, 1).re - 1.0).abs() < 1e-15);
        assert!(b.q().get(2, 0).norm() < 1e-15 && b.q().get(2, 1).norm() < 1e-15);
        assert_eq!(evaluate_at(&b, &[c(1.0), c(1.0)], &[c(0.0)]).unwrap_err(), Error::NoRecurrence);
    }

    #[test]
    fn explicit_vandermonde_matches_arnoldi_up_to_phase() {
        let xs: [f64; 6] = [-1.0, -0.4, 0.1, 0.5, 0.9, 1.3];
        let vand: Vec<Vec<Scalar>> = (0..3).map(|k| xs.iter().map(|&x| c(x.powi(k))).collect()).collect();
        let pe = Problem::real(&xs, &[0.0; 6], BasisSpec::Explicit(CMatrix::from_columns(6, &vand))).unwrap();
        let pm = Problem::real(&xs, &[0.0; 6], BasisSpec::Monomial(3)).unwrap();
        let w = WeightVector::new(vec![1.0, 2.0, 1.0, 3.0, 1.0, 2.0]).unwrap();
        let qe = explicit_weighted_qr(&pe, &w).unwrap();
        let qa = weighted_arnoldi(&pm, &w).unwrap();
        for k in 0..3 {
            let inner = crate::linalg::cdot(qe.q().col(k), qa.q().col(k));
            assert!((inner.norm() - 1.0).abs() < 1e-12, "column {k}: {inner}");
        }
    }
}
