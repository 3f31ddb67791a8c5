//! Primal-dual interior-point method on the L2-weighted dual
//! `max_{w in S} d(w)`.
//!
//! Each iteration solves one weighted least-squares problem, forms the
//! low-rank Hessian factor `K`, and computes the Newton direction of the
//! perturbed KKT system with two Sherman-Morrison-Woodbury solves sharing a
//! single Cholesky factorization of `I + 2 K Z^-1 K^T`.

use crate::error::{Error, Result};
use crate::lawson::{filter_weights, HistoryRow, SolveReport, Status};
use crate::linalg::{norm_inf, Cholesky, Matrix};
use crate::problem::{Problem, WeightVector};
use crate::wls::{dual_gradient, hessian_factor, solve_wls, HessianFactor, WlsSolution};

/// Interior-point iterate. Vectors have length `m`; filtered nodes carry
/// `w_i = z_i = 0` and are absent from `active`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    pub w: Vec<f64>,
    pub y: f64,
    pub z: Vec<f64>,
    pub mu: f64,
    pub k: usize,
    pub active: Vec<usize>,
}

impl DualState {
    /// Full state with every node active.
    pub fn new(w: Vec<f64>, y: f64, z: Vec<f64>, mu: f64) -> Self {
        let active = (0..w.len()).collect();
        Self { w, y, z, mu, k: 0, active }
    }

    fn active_w(&self) -> Vec<f64> {
        self.active.iter().map(|&i| self.w[i]).collect()
    }

    fn active_z(&self) -> Vec<f64> {
        self.active.iter().map(|&i| self.z[i]).collect()
    }

    fn renormalize(&mut self) {
        let s: f64 = self.w.iter().sum();
        self.w.iter_mut().for_each(|v| *v /= s);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonDirection {
    pub n_w: Vec<f64>,
    pub n_y: f64,
    pub n_z: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Z0Mode {
    /// `z = e`.
    Ones,
    /// `z_i = mu0 / w_i`, exactly centered.
    MuOverW,
}

#[derive(Clone, Debug)]
pub struct IpmConfig {
    pub tau: f64,
    pub mu0: f64,
    pub eps_d: f64,
    pub eps_k: f64,
    pub k_max: usize,
    pub eps_w: f64,
    pub w0: Option<WeightVector>,
    pub z0_mode: Z0Mode,
}

impl Default for IpmConfig {
    fn default() -> Self {
        Self {
            tau: 0.99,
            mu0: 1e-5,
            eps_d: 1e-10,
            eps_k: 1e-10,
            k_max: 200,
            eps_w: 0.0,
            w0: None,
            z0_mode: Z0Mode::Ones,
        }
    }
}

impl IpmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidConfig(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.mu0 > 0.0) {
            return Err(Error::InvalidConfig("mu0 must be positive".into()));
        }
        if !(self.eps_d >= 0.0 && self.eps_k >= 0.0 && self.eps_w >= 0.0) {
            return Err(Error::InvalidConfig("tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `[-grad - y e - z; W z - mu e; w^T e - 1]` over the active nodes.
pub fn kkt_residual(state: &DualState, grad: &[f64]) -> Vec<f64> {
    let s = state.active.len();
    let mut out = Vec::with_capacity(2 * s + 1);
    out.extend(state.active.iter().map(|&i| -grad[i] - state.y - state.z[i]));
    out.extend(state.active.iter().map(|&i| state.w[i] * state.z[i] - state.mu));
    out.push(state.active.iter().map(|&i| state.w[i]).sum::<f64>() - 1.0);
    out
}

/// `(-hess d + Sigma)^-1` with `Sigma = W^-1 Z`, applied through the
/// Sherman-Morrison-Woodbury identity.
pub struct SmwOperator<'a> {
    k: &'a Matrix,
    w: &'a [f64],
    z: &'a [f64],
    inner: Cholesky,
}

impl<'a> SmwOperator<'a> {
    pub fn new(k: &'a HessianFactor, w: &'a [f64], z: &'a [f64]) -> Result<Self> {
        let kk = &k.k;
        let (rows, s) = (kk.rows(), kk.cols());
        assert_eq!(w.len(), s);
        assert_eq!(z.len(), s);
        // I + 2 K Z^-1 K^T
        let mut c = Matrix::identity(rows);
        for j in 0..s {
            let col = kk.col(j);
            let scale = 2.0 / z[j];
            for b in 0..rows {
                let kb = col[b] * scale;
                if kb == 0.0 {
                    continue;
                }
                for a in b..rows {
                    c.add_at(a, b, col[a] * kb);
                }
            }
        }
        for b in 0..rows {
            for a in b + 1..rows {
                c.set(b, a, c.get(a, b));
            }
        }
        let inner = Cholesky::factor(&c).ok_or(Error::IndefiniteSystem)?;
        Ok(Self { k: kk, w, z, inner })
    }

    pub fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let s = rhs.len();
        let scaled: Vec<f64> = (0..s).map(|j| self.w[j].sqrt() / self.z[j] * rhs[j]).collect();
        let u = self.k.mul_vec(&scaled);
        let v = self.inner.solve(&u);
        let kt_v = self.k.transpose_mul_vec(&v);
        (0..s)
            .map(|j| self.w[j] / self.z[j] * rhs[j] - 2.0 * self.w[j].sqrt() / self.z[j] * kt_v[j])
            .collect()
    }
}

/// Solves `(-hess d + W^-1 Z) x = rhs` on the support of `k`.
pub fn smw_solve(k: &HessianFactor, w: &[f64], z: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    Ok(SmwOperator::new(k, w, z)?.apply(rhs))
}

pub fn newton_direction(
    state: &DualState,
    sol: &WlsSolution,
    k: &HessianFactor,
    mu: f64,
) -> Result<NewtonDirection> {
    assert_eq!(sol.support(), state.active.as_slice(), "state and fit disagree on the support");
    let grad = dual_gradient(sol);
    let w = state.active_w();
    let z = state.active_z();
    let op = SmwOperator::new(k, &w, &z)?;

    let h1: Vec<f64> = state
        .active
        .iter()
        .zip(&w)
        .map(|(&i, wi)| -grad[i] - state.y - mu / wi)
        .collect();
    let h2 = w.iter().sum::<f64>() - 1.0;
    let ones = vec![1.0; w.len()];
    let v_e = op.apply(&ones);
    let v_h = op.apply(&h1);
    let n_y = (v_h.iter().sum::<f64>() - h2) / v_e.iter().sum::<f64>();

    let m = state.w.len();
    let mut n_w = vec![0.0; m];
    let mut n_z = vec![0.0; m];
    for (a, &i) in state.active.iter().enumerate() {
        let nw = v_e[a] * n_y - v_h[a];
        n_w[i] = nw;
        n_z[i] = -z[a] + mu / w[a] - z[a] / w[a] * nw;
    }
    Ok(NewtonDirection { n_w, n_y, n_z })
}

/// Fraction-to-boundary step lengths `(alpha_w, alpha_z)`.
pub fn step_lengths(w: &[f64], z: &[f64], n_w: &[f64], n_z: &[f64], tau: f64) -> (f64, f64) {
    let ratio = |x: &[f64], dx: &[f64]| {
        x.iter()
            .zip(dx)
            .filter(|(_, d)| **d < 0.0)
            .map(|(xi, di)| tau * xi / -di)
            .fold(1.0, f64::min)
    };
    (ratio(w, n_w), ratio(z, n_z))
}

/// Adaptive barrier parameter `sigma (w^T z) / m`, over entries with `w_i > 0`.
pub fn update_mu(w: &[f64], z: &[f64]) -> f64 {
    let products: Vec<f64> = w.iter().zip(z).filter(|(wi, _)| **wi > 0.0).map(|(wi, zi)| wi * zi).collect();
    if products.is_empty() {
        return 0.0;
    }
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    let xi = products.iter().copied().fold(f64::INFINITY, f64::min) / mean;
    let sigma = 0.1 * ((1.0 - xi) / (20.0 * xi)).min(2.0).max(0.0).powi(3);
    sigma * mean
}

fn clamp_mu(candidate: f64, previous: f64) -> f64 {
    candidate.max(1e-2 * previous).max(1e-16)
}

fn row(k: usize, sol: &WlsSolution, state: &DualState, grad: &[f64]) -> HistoryRow {
    HistoryRow {
        iter: k,
        d: sol.d,
        r_inf: sol.r_inf(),
        w_inf: state.w.iter().copied().fold(0.0, f64::max),
        kkt_inf: Some(norm_inf(&kkt_residual(state, grad))),
    }
}

fn drop_filtered(state: &mut DualState, eps_w: f64, needed: usize) -> Result<bool> {
    let wv = WeightVector::new(state.w.clone())?;
    let Some(kept) = filter_weights(&wv, eps_w, needed)? else {
        return Ok(false);
    };
    state.w = kept.into_inner();
    state.active.retain(|&i| state.w[i] > 0.0);
    for i in 0..state.w.len() {
        if state.w[i] == 0.0 {
            state.z[i] = 0.0;
        }
    }
    Ok(true)
}

/// Runs the interior-point method.
///
/// The iteration works on data divided by `s = ||r(w0)||_inf`, so the
/// absolute quantities `mu0`, `z0`, `eps_k` and the `mu` floor are relative
/// to the initial residual level; reported values are mapped back to the
/// original scale (`kkt_inf` in the history stays in normalized units).
pub fn ipm_solve(problem: &Problem, cfg: &IpmConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let m = problem.m();
    let w0 = match &cfg.w0 {
        Some(w0) => {
            if w0.len() != m || w0.as_slice().iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidWeights("w0 must be strictly positive with m entries".into()));
            }
            w0.clone()
        }
        None => WeightVector::uniform(m),
    };
    let first = solve_wls(problem, &w0)?;
    let scale = first.r_inf();
    if scale == 0.0 {
        let grad = dual_gradient(&first);
        let state = DualState::new(w0.into_inner(), 0.0, vec![1.0; m], cfg.mu0);
        let history = vec![row(0, &first, &state, &grad)];
        return Ok(SolveReport::assemble("ipm".into(), history, first, cfg.eps_w, Status::Converged, problem));
    }
    let scaled = Problem::new(
        problem.nodes().to_vec(),
        problem.values().iter().map(|v| v / scale).collect(),
        problem.basis().clone(),
        problem.mode(),
    )?;
    let (mut history, mut sol, status) = iterate(&scaled, cfg, w0)?;
    for h in &mut history {
        h.d *= scale * scale;
        h.r_inf *= scale;
    }
    sol.atilde.iter_mut().for_each(|a| *a *= scale);
    sol.r.iter_mut().for_each(|r| *r *= scale);
    sol.d *= scale * scale;
    Ok(SolveReport::assemble("ipm".into(), history, sol, cfg.eps_w, status, problem))
}

fn iterate(problem: &Problem, cfg: &IpmConfig, w0: WeightVector) -> Result<(Vec<HistoryRow>, WlsSolution, Status)> {
    let m = problem.m();
    let needed = problem.n() + 1;
    let w0 = w0.into_inner();
    let z0 = match cfg.z0_mode {
        Z0Mode::Ones => vec![1.0; m],
        Z0Mode::MuOverW => w0.iter().map(|wi| cfg.mu0 / wi).collect(),
    };
    let mut state = DualState::new(w0, 0.0, z0, cfg.mu0);
    drop_filtered(&mut state, cfg.eps_w, needed)?;

    let mut sol = solve_wls(problem, &WeightVector::new(state.w.clone())?)?;
    let mut grad = dual_gradient(&sol);
    state.y = -state.active.iter().map(|&i| grad[i]).fold(f64::NEG_INFINITY, f64::max);
    let mut history = vec![row(0, &sol, &state, &grad)];

    let status = loop {
        let k = state.k;
        if history[k].kkt_inf.unwrap() < cfg.eps_k {
            break Status::Converged;
        }
        if k >= cfg.k_max {
            break Status::IterCapped;
        }
        let factor = hessian_factor(&sol);
        let dir = newton_direction(&state, &sol, &factor, state.mu)?;
        let (aw, az) = step_lengths(&state.w, &state.z, &dir.n_w, &dir.n_z, cfg.tau);

        for &i in &state.active {
            state.w[i] += aw * dir.n_w[i];
            state.z[i] += az * dir.n_z[i];
        }
        state.y += az * dir.n_y;
        let interior = state.y.is_finite()
            && state.active.iter().all(|&i| state.w[i] > 0.0 && state.z[i] > 0.0 && state.z[i].is_finite());
        if !interior {
            return Err(Error::NonFiniteIterate(k));
        }
        state.renormalize();
        state.mu = clamp_mu(update_mu(&state.w, &state.z), state.mu);
        state.k += 1;
        let before = state.active.len();
        drop_filtered(&mut state, cfg.eps_w, needed)?;
        let dropped = state.active.len() < before;

        let next = solve_wls(problem, &WeightVector::new(state.w.clone())?)?;
        if !next.d.is_finite() {
            return Err(Error::NonFiniteIterate(state.k));
        }
        let change = if sol.d > 0.0 { (next.d - sol.d).abs() / sol.d } else { 0.0 };
        sol = next;
        grad = dual_gradient(&sol);
        history.push(row(state.k, &sol, &state, &grad));
        // a shrinking support changes the problem, so d-change is not yet meaningful
        if change < cfg.eps_d && !dropped {
            break Status::Converged;
        }
    };
    Ok((history, sol, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::BasisSpec;
    use crate::wls::{hessian_dense, hessian_factor};

    fn parabola() -> Problem {
        Problem::real(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], BasisSpec::Monomial(1)).unwrap()
    }

    #[test]
    fn kkt_examples() {
        let mu = 1e-14;
        let w = vec![0.25, 0.5, 0.25];
        let z: Vec<f64> = w.iter().map(|wi| mu / wi).collect();
        let state = DualState::new(w, -0.25, z, mu);
        let res = kkt_residual(&state, &[0.25; 3]);
        assert_eq!(res.len(), 7);
        assert!(norm_inf(&res) < 1e-12);

        let m = 4;
        let state = DualState::new(vec![0.25; m], 0.0, vec![1.0; m], 1.0);
        let res = kkt_residual(&state, &[0.0; 4]);
        assert!(res[m..2 * m].iter().all(|v| (v - (0.25 - 1.0)).abs() < 1e-15));
        assert!(res[2 * m].abs() < 1e-15);
    }

    #[test]
    fn smw_without_low_rank_term() {
        let k = HessianFactor { k: Matrix::zeros(2, 3), n: 2, mode: crate::problem::Mode::Real };
        let x = smw_solve(&k, &[0.2, 0.3, 0.5], &[1.0, 2.0, 4.0], &[1.0, 1.0, 1.0]).unwrap();
        for (a, b) in x.iter().zip([0.2, 0.15, 0.125]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn smw_two_node_against_dense_inverse() {
        let p = Problem::real(&[0.0, 1.0], &[1.0, -1.0], BasisSpec::Monomial(1)).unwrap();
        let sol = solve_wls(&p, &WeightVector::uniform(2)).unwrap();
        let k = hessian_factor(&sol);
        let (w, z) = ([0.5, 0.5], [0.5, 0.5]);
        // -hess d + Sigma = [[2,-2],[-2,2]] + I
        let rhs = [0.3, -1.1];
        let x = smw_solve(&k, &w, &z, &rhs).unwrap();
        let det = 3.0 * 3.0 - 4.0;
        let expect = [(3.0 * rhs[0] + 2.0 * rhs[1]) / det, (2.0 * rhs[0] + 3.0 * rhs[1]) / det];
        assert!((x[0] - expect[0]).abs() < 1e-12 && (x[1] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn step_length_examples() {
        assert_eq!(step_lengths(&[0.5, 0.5], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 2.0], 0.9), (1.0, 1.0));
        let (aw, _) = step_lengths(&[0.5, 0.5], &[1.0, 1.0], &[-1.0, 1.0], &[0.0, 0.0], 0.9);
        assert!((aw - 0.45).abs() < 1e-15);
        let (aw, _) = step_lengths(&[0.1, 0.9], &[1.0, 1.0], &[-0.2, -0.9], &[0.0, 0.0], 0.5);
        assert!((aw - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(update_mu(&[0.25; 4], &[2.0; 4]), 0.0);
        // products [0.5, 1.5]: mean 1, xi 0.5
        let mu = update_mu(&[0.5, 0.5], &[1.0, 3.0]);
        assert!((mu - 1.25e-5).abs() < 1e-18);
        // xi -> 0 hits the cap
        let mu = update_mu(&[0.5, 0.5], &[1e-300, 2.0]);
        assert!((mu - 0.8 * 0.5).abs() < 1e-12);
        assert!((clamp_mu(0.0, 1e-5) - 1e-7).abs() < 1e-22);
        assert_eq!(clamp_mu(0.0, 1e-20), 1e-16);
    }

    #[test]
    fn newton_step_vanishes_at_optimum() {
        let p = parabola();
        let w = vec![0.25, 0.5, 0.25];
        let mu = 1e-12;
        let z: Vec<f64> = w.iter().map(|wi| mu / wi).collect();
        let state = DualState::new(w.clone(), -0.25, z, mu);
        let sol = solve_wls(&p, &WeightVector::new(w).unwrap()).unwrap();
        let dir = newton_direction(&state, &sol, &hessian_factor(&sol), mu).unwrap();
        assert!(norm_inf(&dir.n_w) <= 1e-8, "{:?}", dir.n_w);
        assert!(dir.n_w.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn newton_matches_dense_kkt_system() {
        let p = Problem::real(&[-0.7, 0.1, 0.9], &[0.3, -0.4, 0.8], BasisSpec::Monomial(1)).unwrap();
        let w = vec![0.2, 0.5, 0.3];
        let z = vec![0.7, 0.2, 1.3];
        let (y, mu) = (-0.4, 0.05);
        let state = DualState::new(w.clone(), y, z.clone(), mu);
        let sol = solve_wls(&p, &WeightVector::new(w.clone()).unwrap()).unwrap();
        let dir = newton_direction(&state, &sol, &hessian_factor(&sol), mu).unwrap();

        let h = hessian_dense(&p, &sol);
        let g = dual_gradient(&sol);
        let m = 3;
        let dim = 2 * m + 1;
        let mut a = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        let mut b = nalgebra::DVector::<f64>::zeros(dim);
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] = -h.get(i, j);
            }
            a[(i, m)] = -1.0;
            a[(i, m + 1 + i)] = -1.0;
            b[i] = g[i] + y + z[i];
            a[(m, i)] = 1.0;
            a[(m + 1 + i, i)] = z[i];
            a[(m + 1 + i, m + 1 + i)] = w[i];
            b[m + 1 + i] = -(w[i] * z[i] - mu);
        }
        b[m] = -(w.iter().sum::<f64>() - 1.0);
        let x = a.lu().solve(&b).unwrap();
        for i in 0..m {
            assert!((dir.n_w[i] - x[i]).abs() < 1e-9);
            assert!((dir.n_z[i] - x[m + 1 + i]).abs() < 1e-9);
        }
        assert!((dir.n_y - x[m]).abs() < 1e-9);
    }

    #[test]
    fn parabola_optimum() {
        let rep = ipm_solve(&parabola(), &IpmConfig::default()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        for (a, b) in rep.w.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-6, "{:?}", rep.w);
        }
        assert!((rep.eta - 0.5).abs() < 1e-8);
        assert_eq!(rep.reference_set.len(), 3);
    }
}
