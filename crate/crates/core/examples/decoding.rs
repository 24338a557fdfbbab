//! Sparsity and Ising MAP decoders, integer and relaxed, on one instance.

use gtprior::decoders::{decode, DecoderSpec};
use gtprior::items::count_fp_fn;
use gtprior::prior::{build_grid, IsingPrior};
use gtprior::testing::{bernoulli_design, run_tests, NoiseSpec};

fn main() -> gtprior::Result<()> {
    let prior = IsingPrior::uniform(build_grid(10, 10)?, 0.5, 0.006)?;
    // near-critical coupling: some draws are mostly defective, keep a sparse one
    let truth = (0..)
        .map(|seed| prior.gibbs_sample(1000, seed))
        .find(|u| u.as_ref().map_or(true, |u| (1..=15).contains(&u.weight())))
        .expect("unbounded search")?;
    let k = truth.weight();
    let design = bernoulli_design(50, prior.n(), (std::f64::consts::LN_2 / k as f64).min(1.0), 3)?;
    let noise = NoiseSpec::symmetric(0.01)?;
    let y = run_tests(&design, &truth, noise, 4)?;
    println!("n = {}, k = {k}, t = {}", prior.n(), design.t());

    for relaxed in [false, true] {
        let mut sparsity = DecoderSpec::sparsity(noise, relaxed);
        sparsity.defect_rate = Some(k as f64 / prior.n() as f64);
        for spec in [sparsity, DecoderSpec::ising_map(prior.clone(), noise, relaxed)] {
            let r = decode(&spec, &design, &y)?;
            match r.estimate() {
                Some(u) => {
                    let e = count_fp_fn(&truth, u)?;
                    println!(
                        "{:<16} {:?} obj {:.3}  fp {} fn {}  {:.3}s",
                        spec.label(), r.status, r.objective_value, e.false_pos, e.false_neg, r.wall_time
                    );
                }
                None => println!("{:<16} {:?}", spec.label(), r.status),
            }
        }
    }
    Ok(())
}
