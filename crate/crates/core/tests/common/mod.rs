#![allow(dead_code)]

use minimax_dual::linalg::Matrix;
use minimax_dual::{BasisSpec, Mode, Problem, Scalar, WeightVector};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct nodes in [-1, 1] (minimum gap 1e-3) with values in [-1, 1].
pub fn random_real(seed: u64, m: usize, n: usize) -> Problem {
    let mut r = rng(seed);
    let mut xs: Vec<f64> = Vec::with_capacity(m);
    while xs.len() < m {
        let x: f64 = r.gen_range(-1.0..1.0);
        if xs.iter().all(|y| (x - y).abs() > 1e-3) {
            xs.push(x);
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let fs: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..1.0)).collect();
    Problem::real(&xs, &fs, BasisSpec::Monomial(n)).unwrap()
}

/// Distinct nodes in the unit disk with values in the unit square.
pub fn random_complex(seed: u64, m: usize, n: usize) -> Problem {
    let mut r = rng(seed);
    let mut xs: Vec<Scalar> = Vec::with_capacity(m);
    while xs.len() < m {
        let z = Scalar::from_polar(r.gen_range(0.0f64..1.0).sqrt(), r.gen_range(-3.14..3.14));
        if xs.iter().all(|y| (z - y).norm() > 1e-2) {
            xs.push(z);
        }
    }
    let fs = (0..m).map(|_| Scalar::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    Problem::new(xs, fs, BasisSpec::Monomial(n), Mode::Complex).unwrap()
}

/// Strictly positive weights bounded away from zero.
pub fn random_weights(seed: u64, m: usize) -> WeightVector {
    let mut r = rng(seed ^ 0x9e37_79b9);
    WeightVector::new((0..m).map(|_| r.gen_range(0.2..1.0)).collect()).unwrap()
}

pub fn to_nalgebra(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

pub fn dense_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let x = to_nalgebra(a).lu().solve(&DVector::from_column_slice(b)).expect("nonsingular");
    x.iter().copied().collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den
}
