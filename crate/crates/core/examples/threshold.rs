//! The information-density threshold decoder over all k-subsets of a small
//! item set, next to the exhaustive MAP estimate.

use gtprior::decoders::{brute_force_map, threshold_decode, CandidateFamily, ThresholdOutcome, DEFAULT_DELTA};
use gtprior::items::DefectiveSet;
use gtprior::prior::{build_grid, IsingPrior};
use gtprior::testing::{bernoulli_design, run_tests, NoiseSpec};

fn main() -> gtprior::Result<()> {
    let n = 12;
    let k = 2;
    let p = std::f64::consts::LN_2 / k as f64;
    let truth = DefectiveSet::new(n, [3, 4])?;
    let items: Vec<usize> = (0..n).collect();
    let family = CandidateFamily::all_subsets(n, &items, k)?;
    for t in [10, 30, 60] {
        let design = bernoulli_design(t, n, p, 21)?;
        let y = run_tests(&design, &truth.to_vector(), NoiseSpec::Noiseless, 0)?;
        let found = match threshold_decode(&family, &design, &y, 0, DEFAULT_DELTA, p)? {
            ThresholdOutcome::Unique { set } => format!("{:?}", set.members()),
            other => format!("{other:?}"),
        };
        println!("t = {t:>2}: threshold -> {found}");
    }

    let prior = IsingPrior::uniform(build_grid(3, 4)?, 0.5, 0.5)?;
    let design = bernoulli_design(30, n, p, 21)?;
    let y = run_tests(&design, &truth.to_vector(), NoiseSpec::Noiseless, 0)?;
    if let Some(map) = brute_force_map(&design, &y, &prior, NoiseSpec::Noiseless)? {
        println!("MAP estimate {}", map.estimate.to_bitstring());
    }
    Ok(())
}
