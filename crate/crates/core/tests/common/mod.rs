#![allow(dead_code)]

use gtprior::milp::{MilpModel, Relation};
use gtprior::prior::{IsingPrior, ItemGraph};
use gtprior::seed::{derive_seed, rng};
use gtprior::testing::{bernoulli_design, run_tests, NoiseSpec, OutcomeVector, TestDesign};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct MapInstance {
    pub prior: IsingPrior,
    pub design: TestDesign,
    pub y: OutcomeVector,
    pub noise: NoiseSpec,
}

/// Random small instance: `n ∈ [6, 12]`, at most 14 edges, `λ ∈ [0, 1.5]`,
/// `φ ∈ [0, 1]`, `t ∈ [4, 20]`, `ρ ∈ {0, 0.05}`; outcomes from a Gibbs draw.
pub fn map_instance(base: u64, case: u64) -> MapInstance {
    let mut r = rng(derive_seed(base, "instance", &[case]));
    let n = r.gen_range(6..=12);
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(&mut r);
    let m = r.gen_range(0..=14.min(pairs.len()));
    let graph = ItemGraph::new(n, pairs[..m].iter().copied()).unwrap();
    let lambda = r.gen_range(0.0..=1.5);
    let phi = r.gen_range(0.0..=1.0);
    let prior = IsingPrior::uniform(graph, lambda, phi).unwrap();
    let t = r.gen_range(4..=20);
    let p = r.gen_range(0.1..0.4);
    let design = bernoulli_design(t, n, p, r.gen()).unwrap();
    let noise = if r.gen_bool(0.5) { NoiseSpec::Noiseless } else { NoiseSpec::symmetric(0.05).unwrap() };
    let truth = prior.gibbs_sample(50, r.gen()).unwrap();
    let y = run_tests(&design, &truth, noise, r.gen()).unwrap();
    MapInstance { prior, design, y, noise }
}

/// Up to 16 binary variables and 10 rows, integer coefficients in `[−5, 5]`.
pub fn random_binary_model(r: &mut impl Rng) -> MilpModel {
    let n = r.gen_range(1..=16);
    let rows = r.gen_range(0..=10);
    let mut m = MilpModel::new();
    for _ in 0..n {
        let c = r.gen_range(-5i32..=5) as f64;
        m.binary(c);
    }
    for _ in 0..rows {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| if r.gen_bool(0.6) { r.gen_range(-5i32..=5) as f64 } else { 0.0 })
            .collect();
        let rel = match r.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        let rhs = r.gen_range(-5i32..=5) as f64;
        m.add_dense_constraint(&coeffs, rel, rhs);
    }
    m
}

/// Exhaustive minimum over {0,1}^n.
pub fn enumerate_binary(m: &MilpModel) -> Option<f64> {
    let n = m.num_vars();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if m.constraints.iter().all(|c| c.violation(&x) <= 1e-12) {
            let v = m.evaluate(&x);
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    }
    best
}
