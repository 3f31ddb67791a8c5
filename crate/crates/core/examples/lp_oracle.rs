//! Real data only: the exact LP reference solution next to the IPM, plus the
//! sign pattern of the LP multipliers on its basic nodes.

use minimax_dual::refcheck::DEFAULT_LP_CAP;
use minimax_dual::{builtin_problem, ipm_solve, lp_reference, IpmConfig};

fn main() -> minimax_dual::Result<()> {
    for (name, n) in [("f1", 16), ("f1", 21), ("f2", 21)] {
        let p = builtin_problem(name, n)?;
        let lp = lp_reference(&p, DEFAULT_LP_CAP)?;
        let ipm = ipm_solve(&p, &IpmConfig::default())?;
        let signs: String = lp.multipliers.iter().map(|t| if *t > 0.0 { '+' } else { '-' }).collect();
        println!("{name}/P{n}: lp eta {:.12e} ({} pivots), ipm eta {:.12e}, rel diff {:.1e}",
            lp.eta, lp.pivots, ipm.eta, (ipm.eta - lp.eta).abs() / lp.eta);
        println!("  {} basic nodes, signs {signs}", lp.basic_indices.len());
    }
    Ok(())
}
