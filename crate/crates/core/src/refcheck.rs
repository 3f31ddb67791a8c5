//! Verification oracles and diagnostics.
//!
//! Contains the real-case linear-programming reference solver, detection of
//! reference (equioscillation) points, complementary-slackness and
//! convergence-factor diagnostics, and finite-difference / brute-force
//! cross-checks of the dual objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, Matrix};
use crate::orthobasis::{weighted_arnoldi, WeightedBasis};
use crate::problem::{BasisSpec, Mode, Problem, Scalar, WeightVector};
use crate::wls::{dual_gradient, hessian_dense, solve_wls};

/// Default relative tolerance for reference-point detection.
pub const DEFAULT_REF_TOL: f64 = 1e-6;

/// Default node cap for the LP oracle.
pub const DEFAULT_LP_CAP: usize = 5000;

/// Nodes where the residual attains (nearly) its maximum modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub indices: Vec<usize>,
    pub magnitudes: Vec<f64>,
    /// Residual signs (real mode only).
    pub signs: Option<Vec<i8>>,
    pub eta: f64,
    pub tol_used: f64,
}

impl ReferenceSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn detect_reference_points(r: &[Scalar], eta: f64, tol: f64, mode: Mode) -> ReferenceSet {
    let level = (1.0 - tol) * eta;
    let indices: Vec<usize> = (0..r.len()).filter(|&i| r[i].norm() >= level).collect();
    let magnitudes = indices.iter().map(|&i| r[i].norm()).collect();
    let signs = (mode == Mode::Real)
        .then(|| indices.iter().map(|&i| if r[i].re >= 0.0 { 1 } else { -1 }).collect());
    ReferenceSet { indices, magnitudes, signs, eta, tol_used: tol }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternationCheck {
    pub ok: bool,
    pub alternating_run: usize,
}

/// Longest sign-alternating subsequence of the members, in index order.
///
/// Index order is node order for sorted grids; use
/// [`check_alternation_sorted`] when the nodes are not sorted.
pub fn check_alternation(refset: &ReferenceSet, n: usize) -> AlternationCheck {
    let signs = refset.signs.as_deref().unwrap_or(&[]);
    alternation_of(signs.iter().copied(), n)
}

/// Like [`check_alternation`] but orders members by their real node value.
pub fn check_alternation_sorted(refset: &ReferenceSet, nodes: &[Scalar], n: usize) -> AlternationCheck {
    let signs = refset.signs.as_deref().unwrap_or(&[]);
    let mut order: Vec<usize> = (0..signs.len()).collect();
    order.sort_by(|&a, &b| nodes[refset.indices[a]].re.total_cmp(&nodes[refset.indices[b]].re));
    alternation_of(order.into_iter().map(|k| signs[k]), n)
}

fn alternation_of(signs: impl Iterator<Item = i8>, n: usize) -> AlternationCheck {
    // the longest alternating subsequence has one element per same-sign block
    let mut run = 0;
    let mut last = 0i8;
    for s in signs {
        if s != last {
            run += 1;
            last = s;
        }
    }
    AlternationCheck { ok: run >= n + 1, alternating_run: run }
}

/// `max_j w_j (eta - |r_j|) / eta`.
pub fn check_complementary_slackness(w: &[f64], r: &[Scalar], eta: f64) -> f64 {
    w.iter()
        .zip(r)
        .map(|(wj, rj)| wj * (eta - rj.norm()) / eta)
        .fold(0.0, f64::max)
}

/// Largest non-reference residual over `eta`; `None` when every node is a
/// reference point.
pub fn convergence_factor_estimate(r: &[Scalar], refset: &ReferenceSet) -> Option<f64> {
    let mut member = vec![false; r.len()];
    for &i in &refset.indices {
        member[i] = true;
    }
    let outside = (0..r.len()).filter(|&i| !member[i]).map(|i| r[i].norm()).fold(None, |acc: Option<f64>, v| {
        Some(acc.map_or(v, |a| a.max(v)))
    });
    outside.map(|v| v / refset.eta)
}

// keeps the relative measure meaningful when the residual vanishes
fn noise_floor(problem: &Problem) -> f64 {
    1e-12 * problem.values_inf_norm().powi(2)
}

fn tangent_pairs(w: &[f64]) -> Vec<(usize, usize)> {
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    let s = support.len();
    let mut pairs: Vec<(usize, usize)> = support.windows(2).map(|p| (p[0], p[1])).collect();
    if s > 2 {
        pairs.push((support[0], support[s - 1]));
    }
    pairs
}

fn shifted(w: &[f64], i: usize, j: usize, t: f64) -> Result<WeightVector> {
    let mut v = w.to_vec();
    v[i] += t;
    v[j] -= t;
    WeightVector::new(v)
}

/// Maximum discrepancy between the analytic gradient and central
/// differences of `d` along simplex-tangent directions `e_i - e_j`,
/// relative to `||grad||_inf`.
pub fn fd_gradient_check(problem: &Problem, w: &WeightVector, h: f64) -> Result<f64> {
    let ws = w.as_slice();
    let g = dual_gradient(&solve_wls(problem, w)?);
    let scale = ws
        .iter()
        .zip(&g)
        .filter(|(wi, _)| **wi > 0.0)
        .map(|(_, gi)| gi.abs())
        .fold(noise_floor(problem), f64::max);
    let mut worst: f64 = 0.0;
    for (i, j) in tangent_pairs(ws) {
        let t = h * ws[i].min(ws[j]);
        // d is evaluated without renormalization: WeightVector keeps the sum at 1
        let dp = solve_wls(problem, &shifted(ws, i, j, t)?)?.d;
        let dm = solve_wls(problem, &shifted(ws, i, j, -t)?)?.d;
        let fd = (dp - dm) / (2.0 * t);
        let an = g[i] - g[j];
        let err = (fd - an).abs();
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

/// Maximum discrepancy between the dense Hessian and central differences of
/// the analytic gradient along simplex-tangent directions, relative to
/// `max |hess|`.
pub fn fd_hessian_check(problem: &Problem, w: &WeightVector, h: f64) -> Result<f64> {
    let ws = w.as_slice();
    let sol = solve_wls(problem, w)?;
    let support = sol.support().to_vec();
    let pos = |idx: usize| support.iter().position(|&s| s == idx).unwrap();
    let hess = hessian_dense(problem, &sol);
    let scale = hess.max_abs().max(noise_floor(problem));
    let mut worst: f64 = 0.0;
    for (i, j) in tangent_pairs(ws) {
        let t = h * ws[i].min(ws[j]);
        let gp = dual_gradient(&solve_wls(problem, &shifted(ws, i, j, t)?)?);
        let gm = dual_gradient(&solve_wls(problem, &shifted(ws, i, j, -t)?)?);
        let (pi, pj) = (pos(i), pos(j));
        for (row, &k) in support.iter().enumerate() {
            let fd = (gp[k] - gm[k]) / (2.0 * t);
            let an = hess.get(row, pi) - hess.get(row, pj);
            let err = (fd - an).abs();
            worst = worst.max(err / scale);
        }
    }
    Ok(worst)
}

/// Maximum of `d(w)` over the simplex grid with spacing `resolution`
/// (tiny problems only, `m <= 4`).
pub fn brute_force_dual(problem: &Problem, resolution: f64) -> Result<f64> {
    Ok(brute_force_dual_argmax(problem, resolution)?.0)
}

/// As [`brute_force_dual`], also returning the maximizing grid point.
pub fn brute_force_dual_argmax(problem: &Problem, resolution: f64) -> Result<(f64, Vec<f64>)> {
    let m = problem.m();
    if m > 4 {
        return Err(Error::CapExceeded { size: m, cap: 4 });
    }
    let steps = (1.0 / resolution).round() as usize;
    if steps == 0 {
        return Err(Error::InvalidConfig("resolution must be at most 1".into()));
    }
    let mut best = (f64::NEG_INFINITY, vec![0.0; m]);
    let mut counts = vec![0usize; m];
    enumerate(problem, steps, 0, steps, &mut counts, &mut best);
    Ok(best)
}

fn enumerate(
    problem: &Problem,
    steps: usize,
    pos: usize,
    left: usize,
    counts: &mut Vec<usize>,
    best: &mut (f64, Vec<f64>),
) {
    let m = counts.len();
    if pos == m - 1 {
        counts[pos] = left;
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
        let d = WeightVector::new(w.clone())
            .ok()
            .and_then(|wv| solve_wls(problem, &wv).ok())
            .map_or(0.0, |s| s.d);
        if d > best.0 {
            *best = (d, w);
        }
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        enumerate(problem, steps, pos + 1, left - c, counts, best);
    }
}

/// Solution of the real minimax LP in the orthonormal uniform-weight basis
/// `Psi = sqrt(m) Q`.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub eta: f64,
    /// Coefficients with respect to `Psi = sqrt(m) Q`.
    pub atilde: Vec<f64>,
    /// Node indices of the positive basic dual variables, sorted.
    pub basic_indices: Vec<usize>,
    /// Dual values `t_j = y+_j - y-_j` at `basic_indices`.
    pub multipliers: Vec<f64>,
    pub basis: WeightedBasis,
    pub pivots: usize,
}

impl LpSolution {
    /// Coefficients for [`WeightedBasis::values_at_nodes`]; with uniform
    /// weights the basis polynomials are exactly the columns of `Psi`.
    pub fn q_coefficients(&self) -> Vec<Scalar> {
        self.atilde.iter().map(|&a| Scalar::new(a, 0.0)).collect()
    }

    pub fn residual(&self, problem: &Problem) -> Result<Vec<Scalar>> {
        let p = self.basis.values_at_nodes(problem, &self.q_coefficients())?;
        Ok(problem.values().iter().zip(&p).map(|(f, v)| Scalar::new(f.re - v.re, 0.0)).collect())
    }
}

/// Exact minimax level of a real problem by a dense revised simplex method
/// (Dantzig pricing, Bland's rule during degenerate stalls) applied to the
/// dual LP
/// `min f^T (y+ - y-)  s.t.  Psi^T (y+ - y-) = 0, e^T (y+ + y-) = 1, y >= 0`.
pub fn lp_reference(problem: &Problem, cap: usize) -> Result<LpSolution> {
    if problem.mode() != Mode::Real {
        return Err(Error::ComplexData);
    }
    if !matches!(problem.basis(), BasisSpec::Monomial(_)) {
        return Err(Error::NeedsMonomialBasis);
    }
    let m = problem.m();
    if m > cap {
        return Err(Error::CapExceeded { size: m, cap });
    }
    let n = problem.n();
    let basis = weighted_arnoldi(problem, &WeightVector::uniform(m))?;
    let sm = (m as f64).sqrt();
    let psi = Matrix::from_fn(m, n, |i, j| basis.q().get(i, j).re * sm);
    let f: Vec<f64> = problem.values().iter().map(|z| z.re).collect();

    let lp = DualLp { psi: &psi, f: &f };
    let out = lp.solve()?;
    let atilde = out.pi[..n].to_vec();
    let eta = -out.pi[n];

    let mut pairs: Vec<(usize, f64)> = out
        .basic
        .iter()
        .zip(&out.x_b)
        .filter(|(_, &val)| val > 1e-12)
        .map(|(&var, &val)| if var < m { (var, val) } else { (var - m, -val) })
        .collect();
    pairs.sort_by_key(|p| p.0);
    Ok(LpSolution {
        eta,
        atilde,
        basic_indices: pairs.iter().map(|p| p.0).collect(),
        multipliers: pairs.iter().map(|p| p.1).collect(),
        basis,
        pivots: out.pivots,
    })
}

struct DualLp<'a> {
    psi: &'a Matrix,
    f: &'a [f64],
}

struct SimplexOutcome {
    basic: Vec<usize>,
    x_b: Vec<f64>,
    pi: Vec<f64>,
    pivots: usize,
}

const REDUCED_COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
/// Degenerate pivots in a row before pricing switches to Bland's rule.
const BLAND_AFTER: usize = 20;

impl DualLp<'_> {
    fn m(&self) -> usize {
        self.psi.rows()
    }

    fn rows(&self) -> usize {
        self.psi.cols() + 1
    }

    /// Column of variable `var`: `y+_j` for `var < m`, else `y-_j`.
    fn column(&self, var: usize) -> Vec<f64> {
        let (m, n) = (self.m(), self.psi.cols());
        let (j, sign) = if var < m { (var, 1.0) } else { (var - m, -1.0) };
        let mut col: Vec<f64> = (0..n).map(|k| sign * self.psi.get(j, k)).collect();
        col.push(1.0);
        col
    }

    fn column_dot(&self, var: usize, pi: &[f64]) -> f64 {
        let (m, n) = (self.m(), self.psi.cols());
        let (j, sign) = if var < m { (var, 1.0) } else { (var - m, -1.0) };
        let mut s = pi[n];
        for k in 0..n {
            s += sign * self.psi.get(j, k) * pi[k];
        }
        s
    }

    fn cost(&self, var: usize) -> f64 {
        let m = self.m();
        if var < m {
            self.f[var]
        } else {
            -self.f[var - m]
        }
    }

    /// Feasible start from `n + 1` spread nodes: the null vector `t` of
    /// `Psi_S^T` is unique up to scale (Haar), and `|t| / sum |t|` with the
    /// matching `y+`/`y-` columns is a basic feasible solution.
    fn initial_basis(&self) -> Result<(Vec<usize>, Vec<f64>)> {
        let (m, n) = (self.m(), self.psi.cols());
        let nodes: Vec<usize> = (0..=n).map(|k| (k * (m - 1) + n / 2) / n.max(1)).collect();
        let mut t = vec![1.0; n + 1];
        if n > 0 {
            let a = Matrix::from_fn(n, n, |i, j| self.psi.get(nodes[j + 1], i));
            let rhs: Vec<f64> = (0..n).map(|i| -self.psi.get(nodes[0], i)).collect();
            let rest = lu_solve(&a, &rhs).ok_or(Error::RankDeficientBasis)?;
            t[1..].copy_from_slice(&rest);
        }
        let total: f64 = t.iter().map(|v| v.abs()).sum();
        let basic = nodes.iter().zip(&t).map(|(&j, &tj)| if tj >= 0.0 { j } else { m + j }).collect();
        Ok((basic, t.iter().map(|v| v.abs() / total).collect()))
    }

    fn solve(&self) -> Result<SimplexOutcome> {
        let rows = self.rows();
        let m = self.m();
        let mut b = vec![0.0; rows];
        b[rows - 1] = 1.0;
        let (mut basic, mut x_b) = self.initial_basis()?;
        let mut binv = self.refactor(&basic)?;
        let mut pivots = 0;
        let mut degenerate_run = 0;
        loop {
            if pivots % REFACTOR_EVERY == REFACTOR_EVERY - 1 {
                binv = self.refactor(&basic)?;
                x_b = binv.mul_vec(&b);
            }
            let cb: Vec<f64> = basic.iter().map(|&v| self.cost(v)).collect();
            let pi = binv.transpose_mul_vec(&cb);
            let reduced = |var: usize| self.cost(var) - self.column_dot(var, &pi);
            let candidates = (0..2 * m).filter(|var| !basic.contains(var));
            let entering = if degenerate_run >= BLAND_AFTER {
                // Bland: first improving column, which rules out cycling
                candidates.into_iter().find(|&var| reduced(var) < -REDUCED_COST_TOL)
            } else {
                candidates
                    .map(|var| (var, reduced(var)))
                    .filter(|&(_, rc)| rc < -REDUCED_COST_TOL)
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(var, _)| var)
            };
            let Some(entering) = entering else {
                return Ok(SimplexOutcome { basic, x_b, pi, pivots });
            };
            let u = binv.mul_vec(&self.column(entering));
            let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut leave: Option<(usize, f64)> = None;
            for (i, &ui) in u.iter().enumerate() {
                if ui > PIVOT_TOL * umax {
                    let theta = x_b[i].max(0.0) / ui;
                    leave = match leave {
                        None => Some((i, theta)),
                        Some((li, lt)) => {
                            if theta < lt - 1e-14 || (theta <= lt + 1e-14 && basic[i] < basic[li]) {
                                Some((i, theta))
                            } else {
                                Some((li, lt))
                            }
                        }
                    };
                }
            }
            let Some((r, theta)) = leave else {
                return Err(Error::Unbounded);
            };
            degenerate_run = if theta <= 1e-14 { degenerate_run + 1 } else { 0 };
            pivot(&mut binv, &mut x_b, &u, r);
            basic[r] = entering;
            pivots += 1;
        }
    }

    fn refactor(&self, basic: &[usize]) -> Result<Matrix> {
        let rows = basic.len();
        let bmat = {
            let cols: Vec<Vec<f64>> = basic.iter().map(|&v| self.column(v)).collect();
            Matrix::from_fn(rows, rows, |i, j| cols[j][i])
        };
        let mut inv = Matrix::zeros(rows, rows);
        for j in 0..rows {
            let mut e = vec![0.0; rows];
            e[j] = 1.0;
            let col = lu_solve(&bmat, &e).ok_or(Error::RankDeficientBasis)?;
            inv.col_mut(j).copy_from_slice(&col);
        }
        Ok(inv)
    }
}

fn pivot(binv: &mut Matrix, x_b: &mut [f64], u: &[f64], r: usize) {
    let rows = binv.rows();
    let ur = u[r];
    for j in 0..rows {
        let v = binv.get(r, j) / ur;
        binv.set(r, j, v);
    }
    x_b[r] /= ur;
    for i in 0..rows {
        if i == r || u[i] == 0.0 {
            continue;
        }
        let ui = u[i];
        for j in 0..rows {
            let v = binv.get(i, j) - ui * binv.get(r, j);
            binv.set(i, j, v);
        }
        x_b[i] -= ui * x_b[r];
    }
}
