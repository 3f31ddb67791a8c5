//! Reruns both published experiment grids and compares each cell with the
//! published numbers. Pass `1` or `2` to run a single table.

use minimax_dual::cli::run_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let which: Vec<u8> = match std::env::args().nth(1) {
        Some(a) => vec![a.parse()?],
        None => vec![1, 2],
    };
    for t in which {
        println!("table {t}");
        println!("{:<4} {:>4} {:>6} {:<7} {:>6} {:>6} {:>14} {:>10} {:>7} {:>7}",
            "fn", "n", "eps*m", "method", "iters", "ref", "r_inf", "rel err", "nodes", "ref");
        for row in run_table(t)? {
            let c = &row.cell;
            let rel = (row.outcome.eta - c.r_inf).abs() / c.r_inf;
            println!("{:<4} {:>4} {:>6.0e} {:<7} {:>6} {:>6} {:>14.8e} {:>10.2e} {:>7} {:>7}",
                c.problem, c.dim, c.eps_scale, format!("{:?}", c.method).to_lowercase(),
                row.outcome.iterations, c.iterations, row.outcome.eta, rel, row.outcome.active_nodes, c.final_nodes);
        }
        println!();
    }
    Ok(())
}
