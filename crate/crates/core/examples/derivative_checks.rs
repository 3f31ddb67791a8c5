//! Finite-difference checks of the dual gradient and Hessian, and the
//! low-rank (SMW) Newton solve against a dense factorization.

use minimax_dual::ipm::smw_solve;
use minimax_dual::linalg::lu_solve;
use minimax_dual::refcheck::{fd_gradient_check, fd_hessian_check};
use minimax_dual::wls::{hessian_dense, hessian_factor};
use minimax_dual::{builtin_problem, solve_wls, WeightVector};

fn main() -> minimax_dual::Result<()> {
    for (name, n) in [("f1", 8), ("g1", 6)] {
        let p = builtin_problem(name, n)?;
        // every k-th node, so the subset still spans the domain
        let k = p.m() / 60;
        let nodes: Vec<_> = p.nodes().iter().step_by(k).copied().collect();
        let values: Vec<_> = p.values().iter().step_by(k).copied().collect();
        let p = minimax_dual::Problem::new(nodes, values, p.basis().clone(), p.mode())?;
        let m = p.m();
        let w = WeightVector::new((0..m).map(|i| 1.0 + (i as f64).sin().abs()).collect())?;
        println!("{name} (m={m}, n={n})");
        println!("  gradient fd error {:.2e}", fd_gradient_check(&p, &w, 1e-5)?);
        println!("  hessian  fd error {:.2e}", fd_hessian_check(&p, &w, 1e-5)?);

        let sol = solve_wls(&p, &w)?;
        let z: Vec<f64> = (0..m).map(|i| 0.5 + (i % 3) as f64).collect();
        let rhs: Vec<f64> = (0..m).map(|i| (i as f64).cos()).collect();
        let fast = smw_solve(&hessian_factor(&sol), w.as_slice(), &z, &rhs)?;
        let mut a = hessian_dense(&p, &sol);
        for i in 0..m {
            for j in 0..m {
                a.set(i, j, -a.get(i, j));
            }
            a.set(i, i, a.get(i, i) + z[i] / w.as_slice()[i]);
        }
        let x = lu_solve(&a, &rhs).expect("dense system is nonsingular");
        let err = fast.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            / x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        println!("  SMW vs dense      {:.2e}", err);
    }
    Ok(())
}
