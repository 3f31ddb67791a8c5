//! Lawson and the interior-point method side by side on the Runge-type
//! function `f1`, printing the convergence history of each.

use minimax_dual::{builtin_problem, ipm_solve, lawson_solve, IpmConfig, LawsonConfig, SolveReport};

fn show(rep: &SolveReport) {
    println!("{}: {} iterations, {:?}", rep.method, rep.iterations, rep.status);
    let stride = (rep.history.len() / 8).max(1);
    for h in rep.history.iter().step_by(stride).chain(rep.history.last()) {
        println!("  k={:4}  d={:.10e}  |r|inf={:.10e}  gap={:.2e}", h.iter, h.d, h.r_inf, h.r_inf - h.d.sqrt());
    }
    println!("  eta={:.10e}  active nodes={}\n", rep.eta, rep.active_nodes);
}

fn main() -> minimax_dual::Result<()> {
    let p = builtin_problem("f1", 16)?;
    show(&lawson_solve(&p, &LawsonConfig { max_iter: 1000, ..LawsonConfig::default() })?);
    show(&ipm_solve(&p, &IpmConfig::default())?);
    Ok(())
}
