//! Gibbs samples from an Ising prior on a grid, checked against exact
//! marginals on a graph small enough to enumerate.

use gtprior::prior::{build_grid, IsingPrior};

fn main() -> gtprior::Result<()> {
    let prior = IsingPrior::uniform(build_grid(10, 10)?, 0.5, 0.006)?;
    for (i, u) in prior.gibbs_chains(1000, 7, 4)?.iter().enumerate() {
        println!("chain {i}: {} defectives", u.weight());
    }

    let small = IsingPrior::uniform(build_grid(3, 3)?, 0.5, 0.3)?;
    let exact = small.exact_marginals()?;
    let mcmc = small.gibbs_marginals(5000, 200, 1, 8)?;
    for (j, (e, g)) in exact.iter().zip(&mcmc).enumerate() {
        println!("item {j}: exact {e:.4}  gibbs {g:.4}");
    }
    Ok(())
}
