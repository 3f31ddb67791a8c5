//! Solves, stores the fit as a model file and evaluates it off the grid.
//! The model stores the Hessenberg recurrence, so evaluation is stable even
//! where the monomial coefficients would not be.

use minimax_dual::cli::ModelFile;
use minimax_dual::{builtin_problem, ipm_solve, IpmConfig, Scalar};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = builtin_problem("f2", 31)?;
    let rep = ipm_solve(&p, &IpmConfig::default())?;
    let model = ModelFile::new(&p, rep.fit.basis.recurrence()?, rep.fit.atilde.clone());

    let path = std::env::temp_dir().join("minimax_f2_p31.json");
    std::fs::write(&path, serde_json::to_string_pretty(&model)?)?;
    let back = ModelFile::load(&path)?;

    let fine: Vec<Scalar> = (0..=40_000).map(|i| Scalar::new(-1.0 + i as f64 / 20_000.0, 0.0)).collect();
    let vals = back.evaluate(&fine)?;
    let worst = fine
        .iter()
        .zip(&vals)
        .map(|(x, v)| (1.0 / (1.0 + 25.0 * x.re * x.re) - v.re).abs())
        .fold(0.0, f64::max);
    println!("model written to {}", path.display());
    println!("eta on nodes {:.8e}, max error on 40001 points {:.8e}", rep.eta, worst);
    Ok(())
}
