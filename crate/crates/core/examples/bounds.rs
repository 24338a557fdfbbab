//! Achievability and converse coefficients and the rate curve over a grid.

use gtprior::bounds::{evaluate_bounds, rate_curves, BoundQuery};

fn main() -> gtprior::Result<()> {
    let q = BoundQuery { theta: None, beta: 0.5, alpha_star: 0.1, nu: None, n: Some(10_000), k: Some(100) };
    let r = evaluate_bounds(&q)?;
    println!(
        "c = {:.4} (converse {:.4}), nu = {:.4}, tests ~ {:.0}",
        r.coefficient, r.converse_coefficient, r.nu_used, r.tests.unwrap_or(f64::NAN)
    );

    let steps: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    for row in rate_curves(&steps, &[0.5])? {
        println!("alpha* = {:.1}: rate {:.4}  per-defective {:.4}", row.alpha_star, row.rate_s, row.rate_nk);
    }
    Ok(())
}
