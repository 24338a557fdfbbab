//! A Bernoulli design, noiseless and noisy outcomes, and a CSV round trip.

use gtprior::items::DefectivityVector;
use gtprior::testing::{bernoulli_design, run_tests, NoiseSpec, TestDesign};

fn main() -> gtprior::Result<()> {
    let n = 20;
    let design = bernoulli_design(12, n, std::f64::consts::LN_2 / 3.0, 11)?;
    let mut truth = DefectivityVector::zeros(n);
    for j in [2, 9, 15] {
        truth.set(j, true);
    }
    let clean = run_tests(&design, &truth, NoiseSpec::Noiseless, 0)?;
    let noisy = run_tests(&design, &truth, NoiseSpec::symmetric(0.1)?, 3)?;
    println!("density   {:.3}", design.density());
    println!("noiseless {}", clean.to_bitstring());
    println!("rho = 0.1 {}", noisy.to_bitstring());

    let mut buf = Vec::new();
    design.write_csv(&mut buf)?;
    let back = TestDesign::read_csv(buf.as_slice())?;
    assert_eq!(back, design);
    println!("csv round trip: {} bytes", buf.len());
    Ok(())
}
