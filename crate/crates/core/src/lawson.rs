//! Lawson's iteratively reweighted least squares, with optional weight
//! filtering, and the report type shared with the interior-point solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Problem, Scalar, WeightVector};
use crate::refcheck::{convergence_factor_estimate, detect_reference_points, ReferenceSet, DEFAULT_REF_TOL};
use crate::wls::{solve_wls, WlsSolution};

/// Report threshold for active nodes when no filtering is configured.
pub const ACTIVE_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct LawsonConfig {
    /// Exponent of the multiplicative update, 1 or 2.
    pub q: u32,
    pub max_iter: usize,
    pub eps_stop: f64,
    pub eps_w: f64,
    /// Starting weights; uniform when `None`.
    pub w0: Option<WeightVector>,
}

impl Default for LawsonConfig {
    fn default() -> Self {
        Self { q: 1, max_iter: 1000, eps_stop: 1e-10, eps_w: 0.0, w0: None }
    }
}

impl LawsonConfig {
    pub fn with_q(q: u32) -> Self {
        Self { q, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q != 1 && self.q != 2 {
            return Err(Error::InvalidConfig(format!("q must be 1 or 2, got {}", self.q)));
        }
        if !(self.eps_stop > 0.0) {
            return Err(Error::InvalidConfig("eps_stop must be positive".into()));
        }
        if !(self.eps_w >= 0.0) {
            return Err(Error::InvalidConfig("eps_w must be nonnegative".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    IterCapped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::IterCapped => "iter-capped",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub d: f64,
    pub r_inf: f64,
    pub w_inf: f64,
    pub kkt_inf: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: String,
    pub iterations: usize,
    pub history: Vec<HistoryRow>,
    /// Final weights over the original indices; filtered nodes carry 0.
    pub w: Vec<f64>,
    pub r: Vec<Scalar>,
    pub eta: f64,
    pub eta_dual: f64,
    pub d: f64,
    pub reference_set: ReferenceSet,
    pub rho_estimate: Option<f64>,
    pub active_nodes: usize,
    pub status: Status,
    /// Least-squares fit at the final weights.
    pub fit: WlsSolution,
}

impl SolveReport {
    pub(crate) fn assemble(
        method: String,
        history: Vec<HistoryRow>,
        fit: WlsSolution,
        eps_w: f64,
        status: Status,
        problem: &Problem,
    ) -> Self {
        let r = fit.r.clone();
        let eta = fit.r_inf();
        let reference_set = detect_reference_points(&r, eta, DEFAULT_REF_TOL, problem.mode());
        let rho_estimate = convergence_factor_estimate(&r, &reference_set);
        let w = fit.w_used.as_slice().to_vec();
        let active_nodes = if eps_w > 0.0 {
            w.iter().filter(|&&v| v >= eps_w).count()
        } else {
            w.iter().filter(|&&v| v > ACTIVE_FLOOR).count()
        };
        Self {
            method,
            iterations: history.len() - 1,
            history,
            w,
            r,
            eta,
            eta_dual: fit.d.max(0.0).sqrt(),
            d: fit.d,
            reference_set,
            rho_estimate,
            active_nodes,
            status,
            fit,
        }
    }

    pub fn w_inf(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }
}

/// `w_j |r_j|^q / sum_i w_i |r_i|^q`.
pub fn lawson_step(w: &WeightVector, r: &[Scalar], q: u32) -> Result<WeightVector> {
    let next: Vec<f64> = w.as_slice().iter().zip(r).map(|(wj, rj)| wj * rj.norm().powi(q as i32)).collect();
    let total: f64 = next.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    WeightVector::new(next)
}

/// Zeroes weights below `eps_w` and renormalizes; `None` when nothing changed.
pub(crate) fn filter_weights(w: &WeightVector, eps_w: f64, needed: usize) -> Result<Option<WeightVector>> {
    if eps_w <= 0.0 || !w.as_slice().iter().any(|&v| v > 0.0 && v < eps_w) {
        return Ok(None);
    }
    let kept: Vec<f64> = w.as_slice().iter().map(|&v| if v < eps_w { 0.0 } else { v }).collect();
    let support = kept.iter().filter(|&&v| v > 0.0).count();
    if support < needed {
        return Err(Error::AllWeightsFiltered { support, needed });
    }
    WeightVector::new(kept).map(Some)
}

pub fn lawson_solve(problem: &Problem, cfg: &LawsonConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let m = problem.m();
    let mut w = match &cfg.w0 {
        Some(w0) => {
            if w0.len() != m {
                return Err(Error::InvalidWeights(format!("w0 has {} entries, expected {m}", w0.len())));
            }
            if w0.as_slice().iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidWeights("w0 must be strictly positive".into()));
            }
            w0.clone()
        }
        None => WeightVector::uniform(m),
    };
    let stop_value = |d: f64| if cfg.q == 1 { d.max(0.0).sqrt() } else { d };

    let mut history = Vec::new();
    let mut prev: Option<f64> = None;
    let mut k = 0;
    let (fit, status) = loop {
        if let Some(f) = filter_weights(&w, cfg.eps_w, problem.n() + 1)? {
            w = f;
        }
        let sol = solve_wls(problem, &w)?;
        history.push(HistoryRow { iter: k, d: sol.d, r_inf: sol.r_inf(), w_inf: w.max(), kkt_inf: None });
        let cur = stop_value(sol.d);
        if let Some(p) = prev {
            if p == 0.0 || (p - cur).abs() / p <= cfg.eps_stop {
                break (sol, Status::Converged);
            }
        }
        if k == cfg.max_iter {
            break (sol, Status::IterCapped);
        }
        w = match lawson_step(&w, &sol.r, cfg.q) {
            Ok(next) => next,
            // interpolation on the support: nothing left to reweight
            Err(Error::ZeroDenominator) => break (sol, Status::Converged),
            Err(e) => return Err(e),
        };
        prev = Some(cur);
        k += 1;
    };
    Ok(SolveReport::assemble(format!("lawson-q{}", cfg.q), history, fit, cfg.eps_w, status, problem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::BasisSpec;

    fn c(v: f64) -> Scalar {
        Scalar::new(v, 0.0)
    }

    #[test]
    fn step_examples() {
        let half = WeightVector::uniform(2);
        assert_eq!(lawson_step(&half, &[c(1.0), c(-1.0)], 1).unwrap().as_slice(), &[0.5, 0.5]);
        let w = lawson_step(&half, &[c(2.0), c(1.0)], 2).unwrap();
        assert!((w.as_slice()[0] - 0.8).abs() < 1e-15 && (w.as_slice()[1] - 0.2).abs() < 1e-15);
        let w = lawson_step(&WeightVector::uniform(3), &[c(1.0), c(1.0), c(0.0)], 1).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 0.5, 0.0]);
        assert_eq!(lawson_step(&half, &[c(0.0), c(0.0)], 1).unwrap_err(), Error::ZeroDenominator);
    }

    #[test]
    fn symmetric_fixed_point() {
        let p = Problem::real(&[0.0, 1.0], &[1.0, -1.0], BasisSpec::Monomial(1)).unwrap();
        for q in [1, 2] {
            let rep = lawson_solve(&p, &LawsonConfig::with_q(q)).unwrap();
            assert_eq!(rep.status, Status::Converged);
            assert_eq!(rep.iterations, 1);
            assert!((rep.w[0] - 0.5).abs() < 1e-15);
            assert!((rep.eta - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn parabola_q1_reaches_dual_maximum() {
        let p = Problem::real(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], BasisSpec::Monomial(1)).unwrap();
        let rep = lawson_solve(&p, &LawsonConfig::with_q(1)).unwrap();
        assert_eq!(rep.status, Status::Converged);
        for (a, b) in rep.w.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-12, "{:?}", rep.w);
        }
        assert!((rep.d - 0.25).abs() < 1e-14);
        assert!((rep.eta - 0.5).abs() < 1e-14);
        assert_eq!(rep.history.len(), rep.iterations + 1);
    }

    #[test]
    fn parabola_q2_cycles() {
        // with a = w_1 + w_3 the q = 2 update maps a to 1 - a, so d = a - a^2 stalls
        let p = Problem::real(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], BasisSpec::Monomial(1)).unwrap();
        let w0 = WeightVector::new(vec![0.15, 0.7, 0.15]).unwrap();
        let w1 = lawson_step(&w0, &solve_wls(&p, &w0).unwrap().r, 2).unwrap();
        assert!((w1.as_slice()[1] - 0.3).abs() < 1e-14);
        let cfg = LawsonConfig { w0: Some(w0), ..LawsonConfig::with_q(2) };
        let rep = lawson_solve(&p, &cfg).unwrap();
        assert!((rep.d - 0.21).abs() < 1e-14);
        assert!((rep.eta - 0.7).abs() < 1e-14);
    }

    #[test]
    fn filtering_too_aggressive_errors() {
        let p = Problem::real(&[-1.0, 0.0, 1.0, 2.0], &[1.0, 0.0, 1.0, 4.0], BasisSpec::Monomial(2)).unwrap();
        let cfg = LawsonConfig { eps_w: 0.3, ..LawsonConfig::default() };
        assert!(matches!(lawson_solve(&p, &cfg), Err(Error::AllWeightsFiltered { .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let p = Problem::real(&[0.0, 1.0], &[1.0, -1.0], BasisSpec::Monomial(1)).unwrap();
        assert!(lawson_solve(&p, &LawsonConfig::with_q(3)).is_err());
        let cfg = LawsonConfig { w0: Some(WeightVector::new(vec![1.0, 0.0]).unwrap()), ..LawsonConfig::default() };
        assert!(matches!(lawson_solve(&p, &cfg), Err(Error::InvalidWeights(_))));
    }
}
