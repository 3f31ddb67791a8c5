//! Complex data: `1/sqrt(2z+1)`-type function `g1` sampled on a curve in the
//! complex plane. The error curve of a best complex approximation is close to
//! a circle, so `|r|` is nearly constant on the reference set.

use minimax_dual::{builtin_problem, ipm_solve, IpmConfig};

fn main() -> minimax_dual::Result<()> {
    let p = builtin_problem("g1", 9)?;
    let rep = ipm_solve(&p, &IpmConfig::default())?;
    println!("m={} n={} eta={:.10e} sqrt(d)={:.10e} iters={}", p.m(), p.n(), rep.eta, rep.eta_dual, rep.iterations);
    println!("reference points: {}", rep.reference_set.len());
    let mut winding = 0.0;
    for k in 0..rep.r.len() {
        let (a, b) = (rep.r[k], rep.r[(k + 1) % rep.r.len()]);
        winding += (b / a).arg();
    }
    println!("winding number of the error curve: {:.3}", winding / std::f64::consts::TAU);
    if let Some(rho) = rep.rho_estimate {
        println!("spread estimate: {rho:.3e}");
    }
    Ok(())
}
