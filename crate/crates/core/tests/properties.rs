mod common;

use minimax_dual::cli::ReportFile;
use minimax_dual::ipm::{newton_direction, smw_solve, step_lengths, update_mu, DualState};
use minimax_dual::lawson::lawson_step;
use minimax_dual::orthobasis::weighted_arnoldi;
use minimax_dual::refcheck::{
    check_alternation, check_alternation_sorted, check_complementary_slackness, fd_gradient_check, DEFAULT_LP_CAP,
};
use minimax_dual::wls::{dual_gradient, hessian_dense, hessian_factor, solve_wls};
use minimax_dual::{
    ipm_solve, lawson_solve, lp_reference, IpmConfig, LawsonConfig, Mode, Problem, Scalar, Status, WeightVector,
};
use proptest::prelude::*;

use common::*;

fn instance(seed: u64, m: usize, n: usize, complex: bool) -> Problem {
    if complex {
        random_complex(seed, m, n)
    } else {
        random_real(seed, m, n)
    }
}

fn sizes() -> impl Strategy<Value = (u64, usize, usize, bool)> {
    (any::<u64>(), 6usize..30, 1usize..6, any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lawson_d_is_monotone((seed, m, n, complex) in sizes(), q in 1u32..=2) {
        let p = instance(seed, m, n, complex);
        let rep = lawson_solve(&p, &LawsonConfig { max_iter: 60, ..LawsonConfig::with_q(q) }).unwrap();
        for w in rep.history.windows(2) {
            prop_assert!(w[1].d >= w[0].d - 1e-12 * w[0].d.abs(), "{} -> {}", w[0].d, w[1].d);
        }
        let total: f64 = rep.w.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lawson_step_stays_on_simplex(w in prop::collection::vec(0.01f64..1.0, 2..20), seed in any::<u64>(), q in 1u32..=2) {
        let w = WeightVector::new(w).unwrap();
        let mut r = rng(seed);
        let res: Vec<Scalar> = (0..w.len()).map(|_| Scalar::new(rand::Rng::gen_range(&mut r, -1.0..1.0), 0.0)).collect();
        let next = lawson_step(&w, &res, q).unwrap();
        prop_assert!((next.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(next.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn weak_duality_on_every_iterate((seed, m, n, complex) in sizes()) {
        let p = instance(seed, m, n, complex);
        let ipm = ipm_solve(&p, &IpmConfig::default()).unwrap();
        let law = lawson_solve(&p, &LawsonConfig { max_iter: 40, ..LawsonConfig::default() }).unwrap();
        for h in ipm.history.iter().chain(&law.history) {
            prop_assert!(h.d.max(0.0).sqrt() <= h.r_inf + 1e-8, "sqrt d {} > r_inf {}", h.d.sqrt(), h.r_inf);
        }
    }

    #[test]
    fn ipm_structure_at_convergence((seed, m, n, complex) in sizes()) {
        let p = instance(seed, m, n, complex);
        let rep = ipm_solve(&p, &IpmConfig::default()).unwrap();
        prop_assert_eq!(rep.status, Status::Converged);
        prop_assert!(rep.w.iter().all(|&v| v >= 0.0));
        prop_assert!((rep.w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let cs = check_complementary_slackness(&rep.w, &rep.r, rep.eta);
        prop_assert!(cs <= 1e-6 * rep.eta, "slackness {cs:e}, eta {}", rep.eta);
        prop_assert!(rep.w.iter().filter(|&&v| v > 1e-8).count() >= n + 1);
        if p.mode() == Mode::Real {
            let alt = check_alternation_sorted(&rep.reference_set, p.nodes(), n);
            prop_assert!(alt.ok, "run {}", alt.alternating_run);
        }
    }

    #[test]
    fn ipm_matches_lp_oracle(seed in any::<u64>(), m in 3usize..=40, n in 1usize..=6) {
        let n = n.min(m - 1);
        let p = random_real(seed, m, n);
        let lp = lp_reference(&p, DEFAULT_LP_CAP).unwrap();
        let ipm = ipm_solve(&p, &IpmConfig::default()).unwrap();
        prop_assert!((ipm.eta - lp.eta).abs() <= 1e-7 * lp.eta, "ipm {} lp {}", ipm.eta, lp.eta);
        // the LP fit attains its level
        let r = lp.residual(&p).unwrap();
        let r_inf = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!((r_inf - lp.eta).abs() <= 1e-9 * lp.eta.max(1.0));
    }

    #[test]
    fn lp_multipliers_alternate(seed in any::<u64>(), m in 4usize..=20, n in 1usize..=4) {
        let n = n.min(m - 2);
        let p = random_real(seed, m, n);
        let lp = lp_reference(&p, DEFAULT_LP_CAP).unwrap();
        if lp.basic_indices.len() == n + 1 {
            for t in lp.multipliers.windows(2) {
                prop_assert!(t[0] * t[1] < 0.0, "{:?}", lp.multipliers);
            }
        }
        let total: f64 = lp.multipliers.iter().map(|t| t.abs()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn smw_matches_dense((seed, m, n, complex) in sizes()) {
        let p = instance(seed, m, n, complex);
        let w = random_weights(seed, m);
        let sol = solve_wls(&p, &w).unwrap();
        let k = hessian_factor(&sol);
        let z: Vec<f64> = random_weights(seed.wrapping_add(1), m).as_slice().iter().map(|v| v * m as f64).collect();
        let ws = w.as_slice();
        let mut a = hessian_dense(&p, &sol);
        for i in 0..m {
            for j in 0..m {
                a.set(i, j, -a.get(i, j));
            }
            a.add_at(i, i, z[i] / ws[i]);
        }
        let rhs: Vec<f64> = (0..m).map(|i| (i as f64).sin()).collect();
        let fast = smw_solve(&k, ws, &z, &rhs).unwrap();
        prop_assert!(rel_err(&fast, &dense_solve(&a, &rhs)) <= 1e-9);
    }

    #[test]
    fn newton_direction_keeps_simplex((seed, m, n, complex) in sizes(), mu in 1e-8f64..1e-2) {
        let p = instance(seed, m, n, complex);
        let w = random_weights(seed, m);
        let sol = solve_wls(&p, &w).unwrap();
        let g = dual_gradient(&sol);
        let y = -g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let state = DualState::new(w.as_slice().to_vec(), y, vec![1.0; m], mu);
        let dir = newton_direction(&state, &sol, &hessian_factor(&sol), mu).unwrap();
        prop_assert!(dir.n_w.iter().sum::<f64>().abs() <= 1e-9);
    }

    #[test]
    fn step_lengths_respect_fraction_to_boundary(
        w in prop::collection::vec(1e-6f64..1.0, 1..30),
        dir in prop::collection::vec(-2.0f64..2.0, 30),
        tau in 0.5f64..0.999,
    ) {
        let s = w.len();
        let z: Vec<f64> = w.iter().map(|v| 1.0 - v / 2.0).collect();
        let (aw, az) = step_lengths(&w, &z, &dir[..s], &dir[..s], tau);
        prop_assert!(aw > 0.0 && aw <= 1.0 && az > 0.0 && az <= 1.0);
        for i in 0..s {
            prop_assert!(w[i] + aw * dir[i] >= (1.0 - tau) * w[i] - 1e-15);
            prop_assert!(z[i] + az * dir[i] >= (1.0 - tau) * z[i] - 1e-15);
        }
    }

    #[test]
    fn mu_update_is_bounded(w in prop::collection::vec(1e-6f64..1.0, 2..30), seed in any::<u64>()) {
        let mut r = rng(seed);
        let z: Vec<f64> = w.iter().map(|_| rand::Rng::gen_range(&mut r, 1e-3..10.0)).collect();
        let mean = w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / w.len() as f64;
        let mu = update_mu(&w, &z);
        prop_assert!(mu >= 0.0 && mu <= 0.8 * mean * (1.0 + 1e-12));
    }

    #[test]
    fn arnoldi_recurrence_reproduces_basis((seed, m, n, complex) in sizes()) {
        let p = instance(seed, m, n, complex);
        let w = random_weights(seed, m);
        let b = weighted_arnoldi(&p, &w).unwrap();
        prop_assert!(b.orthogonality_error() <= 1e-12);
        // x . q_k = sum_i h[i,k] q_i, column by column
        let h = b.hessenberg().unwrap();
        let q = b.q();
        let x: Vec<Scalar> = b.support().iter().map(|&i| p.nodes()[i]).collect();
        for k in 0..n.saturating_sub(1) {
            for row in 0..q.rows() {
                let lhs = x[row] * q.get(row, k);
                let rhs: Scalar = (0..=k + 1).map(|i| h.get(i, k) * q.get(row, i)).sum();
                prop_assert!((lhs - rhs).norm() <= 1e-10);
            }
        }
        // the recurrence evaluates the fit at the original nodes
        let sol = solve_wls(&p, &w).unwrap();
        let direct = b.support_values(&sol.atilde);
        let rec = b.values_at_nodes(&p, &sol.atilde).unwrap();
        for (k, &i) in b.support().iter().enumerate() {
            prop_assert!((direct[k] - rec[i]).norm() <= 1e-10 * (1.0 + direct[k].norm()));
        }
    }

    #[test]
    fn gradient_matches_finite_differences((seed, m, n, complex) in sizes()) {
        let p = instance(seed, m, n, complex);
        let w = random_weights(seed, m);
        prop_assert!(fd_gradient_check(&p, &w, 1e-5).unwrap() <= 1e-4);
    }

    #[test]
    fn report_round_trips(eta in any::<f64>().prop_filter("finite", |v| v.is_finite()), d in 0.0f64..1e300, k in 0usize..10_000) {
        let rep = ReportFile {
            method: "ipm".into(),
            problem: "f1".into(),
            n: 3,
            m: 10,
            mode: Mode::Real,
            status: Status::Converged,
            eta,
            eta_dual: d.sqrt(),
            d,
            iterations: k,
            active_nodes: 4,
            reference_indices: vec![0, 3, 9],
            reference_nodes: vec![[eta, -d]],
            rho_estimate: Some(d / 3.0),
            config: serde_json::json!({ "tau": 0.99, "eps_w": d }),
            wall_ms: 1.5,
        };
        let text = serde_json::to_string(&rep).unwrap();
        let back: ReportFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, rep);
    }
}

#[test]
fn alternation_on_lp_optimum() {
    for seed in 0..10 {
        let p = random_real(300 + seed, 25, 4);
        let lp = lp_reference(&p, DEFAULT_LP_CAP).unwrap();
        let r = lp.residual(&p).unwrap();
        let refs = minimax_dual::refcheck::detect_reference_points(&r, lp.eta, 1e-6, Mode::Real);
        // nodes are sorted, so index order is node order
        assert!(check_alternation(&refs, 4).ok);
    }
}

#[test]
fn solves_are_deterministic() {
    let p = random_complex(77, 30, 5);
    let a = ipm_solve(&p, &IpmConfig::default()).unwrap();
    let b = ipm_solve(&p, &IpmConfig::default()).unwrap();
    assert_eq!(a.w, b.w);
    assert_eq!(a.history, b.history);
    assert_eq!(a.eta.to_bits(), b.eta.to_bits());
}
