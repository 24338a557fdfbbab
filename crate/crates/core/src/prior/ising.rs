use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::ItemGraph;
use crate::error::{check_dim, invalid, Error, Result};
use crate::items::DefectivityVector;
use crate::seed;

/// Largest `n` accepted by the exhaustive routines.
pub const ENUMERATION_LIMIT: usize = 20;

/// Ising prior over `{0,1}^n`:
///
/// `log P(u) + log Z = Σ_{(j,j')∈E} λ_{jj'} (2u_j−1)(2u_{j'}−1) − Σ_j φ_j (2u_j−1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsingPriorRepr", into = "IsingPriorRepr")]
pub struct IsingPrior {
    graph: ItemGraph,
    lambda: Vec<f64>,
    phi: Vec<f64>,
    /// `neighbors[j]` lists `(j', λ_{jj'})`.
    neighbors: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct IsingPriorRepr {
    graph: ItemGraph,
    lambda: Vec<f64>,
    phi: Vec<f64>,
}

impl TryFrom<IsingPriorRepr> for IsingPrior {
    type Error = Error;

    fn try_from(r: IsingPriorRepr) -> Result<Self> {
        IsingPrior::new(r.graph, r.lambda, r.phi)
    }
}

impl From<IsingPrior> for IsingPriorRepr {
    fn from(p: IsingPrior) -> Self {
        IsingPriorRepr { graph: p.graph, lambda: p.lambda, phi: p.phi }
    }
}

impl IsingPrior {
    pub fn new(graph: ItemGraph, lambda: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        check_dim(graph.num_edges(), lambda.len())?;
        check_dim(graph.n(), phi.len())?;
        if lambda.iter().chain(&phi).any(|v| !v.is_finite()) {
            return invalid("Ising parameters must be finite");
        }
        let mut neighbors = vec![Vec::new(); graph.n()];
        for (&(a, b), &l) in graph.edges().iter().zip(&lambda) {
            neighbors[a].push((b, l));
            neighbors[b].push((a, l));
        }
        Ok(Self { graph, lambda, phi, neighbors })
    }

    /// Common edge strength `lambda` and common field `phi`.
    pub fn uniform(graph: ItemGraph, lambda: f64, phi: f64) -> Result<Self> {
        let m = graph.num_edges();
        let n = graph.n();
        Self::new(graph, vec![lambda; m], vec![phi; n])
    }

    pub fn graph(&self) -> &ItemGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Same fields, every edge strength replaced by `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.graph.clone(), vec![lambda; self.lambda.len()], self.phi.clone())
    }

    /// Same common parameters transplanted onto another graph. Uses the mean
    /// edge strength when strengths vary.
    pub fn with_graph(&self, graph: ItemGraph) -> Result<Self> {
        check_dim(self.n(), graph.n())?;
        let lambda = if self.lambda.is_empty() {
            0.0
        } else {
            self.lambda.iter().sum::<f64>() / self.lambda.len() as f64
        };
        let m = graph.num_edges();
        Self::new(graph, vec![lambda; m], self.phi.clone())
    }

    /// `Σ λ_e + Σ φ_j`: the amount by which the 0/1-linearised objective
    /// exceeds the negative log-probability.
    pub fn objective_offset(&self) -> f64 {
        self.lambda.iter().sum::<f64>() + self.phi.iter().sum::<f64>()
    }

    pub fn log_unnormalized_prob(&self, u: &DefectivityVector) -> Result<f64> {
        check_dim(self.n(), u.len())?;
        Ok(self.log_weight(u.bits()))
    }

    pub(crate) fn log_weight(&self, u: &[bool]) -> f64 {
        let s = |b: bool| if b { 1.0 } else { -1.0 };
        let pair: f64 = self
            .graph
            .edges()
            .iter()
            .zip(&self.lambda)
            .map(|(&(a, b), &l)| l * s(u[a]) * s(u[b]))
            .sum();
        let field: f64 = u.iter().zip(&self.phi).map(|(&b, &p)| p * s(b)).sum();
        pair - field
    }

    /// `Σ_{j'∼j} λ_{jj'} (2u_{j'} − 1)`.
    pub fn local_field(&self, u: &[bool], j: usize) -> f64 {
        self.neighbors[j]
            .iter()
            .map(|&(o, l)| if u[o] { l } else { -l })
            .sum()
    }

    /// `log P(u_j = 1, u_{-j}) − log P(u_j = 0, u_{-j})`.
    pub fn flip_gain(&self, u: &[bool], j: usize) -> f64 {
        2.0 * (self.local_field(u, j) - self.phi[j])
    }

    /// Normalized probabilities of all `2^n` configurations; entry `mask`
    /// corresponds to [`DefectivityVector::from_mask`].
    pub fn exact_probabilities(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
        }
        let mut u = vec![false; n];
        let logs: Vec<f64> = (0..1u64 << n)
            .map(|mask| {
                for (j, b) in u.iter_mut().enumerate() {
                    *b = (mask >> j) & 1 == 1;
                }
                self.log_weight(&u)
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
        let z: f64 = weights.iter().sum();
        Ok(weights.into_iter().map(|w| w / z).collect())
    }

    /// `P(u_j = 1)` for every item, by full enumeration (`n ≤ 20`).
    pub fn exact_marginals(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let probs = self.exact_probabilities()?;
        let mut marg = vec![0.0; n];
        for (mask, p) in probs.iter().enumerate() {
            for (j, m) in marg.iter_mut().enumerate() {
                if (mask >> j) & 1 == 1 {
                    *m += p;
                }
            }
        }
        Ok(marg)
    }

    /// Systematic-scan Gibbs sampler: uniform random start, then `sweeps`
    /// passes over `j = 0..n`, each resampling `u_j` from its conditional.
    pub fn gibbs_sample(&self, sweeps: usize, seed: u64) -> Result<DefectivityVector> {
        if sweeps == 0 {
            return invalid("sweeps must be at least 1");
        }
        Ok(DefectivityVector::new(self.gibbs_run(sweeps, seed, |_, _| {})))
    }

    /// Runs the sampler, calling `visit(sweep, u)` after every sweep, and
    /// returns the final state.
    fn gibbs_run(&self, sweeps: usize, seed: u64, mut visit: impl FnMut(usize, &[bool])) -> Vec<bool> {
        let mut rng = seed::rng(seed);
        let mut u: Vec<bool> = (0..self.n()).map(|_| rng.gen()).collect();
        for sweep in 0..sweeps {
            for j in 0..u.len() {
                let gain = self.flip_gain(&u, j);
                let p1 = 1.0 / (1.0 + (-gain).exp());
                debug_assert!((p1 + 1.0 / (1.0 + gain.exp()) - 1.0).abs() < 1e-12);
                u[j] = rng.gen::<f64>() < p1;
            }
            visit(sweep, &u);
        }
        u
    }

    /// Marginals `P(u_j = 1)` estimated by averaging the states after each of
    /// the sweeps past `burn_in`, over `chains` chains seeded as in
    /// [`gibbs_chains`](Self::gibbs_chains).
    pub fn gibbs_marginals(
        &self,
        sweeps: usize,
        burn_in: usize,
        base_seed: u64,
        chains: usize,
    ) -> Result<Vec<f64>> {
        if sweeps <= burn_in || chains == 0 {
            return invalid("need sweeps > burn_in and at least one chain");
        }
        let n = self.n();
        let counts = (0..chains as u64)
            .into_par_iter()
            .map(|i| {
                let mut c = vec![0u64; n];
                self.gibbs_run(sweeps, seed::derive_seed(base_seed, "chain", &[i]), |sweep, u| {
                    if sweep >= burn_in {
                        for (cj, &b) in c.iter_mut().zip(u) {
                            *cj += u64::from(b);
                        }
                    }
                });
                c
            })
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let samples = ((sweeps - burn_in) * chains) as f64;
        Ok(counts.into_iter().map(|c| c as f64 / samples).collect())
    }

    /// Independent chains in parallel; chain `i` uses
    /// `derive_seed(base_seed, "chain", [i])`.
    pub fn gibbs_chains(
        &self,
        sweeps: usize,
        base_seed: u64,
        chains: usize,
    ) -> Result<Vec<DefectivityVector>> {
        (0..chains as u64)
            .into_par_iter()
            .map(|i| self.gibbs_sample(sweeps, seed::derive_seed(base_seed, "chain", &[i])))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::graph::build_grid;

    fn single_edge(lambda: f64, phi: f64) -> IsingPrior {
        IsingPrior::uniform(ItemGraph::new(2, [(0, 1)]).unwrap(), lambda, phi).unwrap()
    }

    #[test]
    fn log_prob_examples() {
        let empty = IsingPrior::uniform(ItemGraph::empty(4), 0.0, 0.0).unwrap();
        let u: DefectivityVector = "1010".parse().unwrap();
        assert_eq!(empty.log_unnormalized_prob(&u).unwrap(), 0.0);

        let p = single_edge(0.5, 0.0);
        assert_eq!(p.log_unnormalized_prob(&"11".parse().unwrap()).unwrap(), 0.5);
        assert_eq!(p.log_unnormalized_prob(&"10".parse().unwrap()).unwrap(), -0.5);

        let p = single_edge(0.5, 0.1);
        let v = p.log_unnormalized_prob(&"11".parse().unwrap()).unwrap();
        assert!((v - 0.3).abs() < 1e-12);

        assert!(p.log_unnormalized_prob(&"111".parse().unwrap()).is_err());
    }

    #[test]
    fn parameter_lengths_checked() {
        let g = ItemGraph::new(3, [(0, 1)]).unwrap();
        assert!(IsingPrior::new(g.clone(), vec![], vec![0.0; 3]).is_err());
        assert!(IsingPrior::new(g.clone(), vec![1.0], vec![0.0; 2]).is_err());
        assert!(IsingPrior::new(g, vec![f64::NAN], vec![0.0; 3]).is_err());
    }

    #[test]
    fn marginals_closed_forms() {
        let p = IsingPrior::uniform(ItemGraph::empty(3), 0.0, 0.0).unwrap();
        for m in p.exact_marginals().unwrap() {
            assert!((m - 0.5).abs() < 1e-12);
        }
        let p = IsingPrior::uniform(ItemGraph::empty(3), 0.0, 0.5).unwrap();
        let expected = (-0.5f64).exp() / (0.5f64.exp() + (-0.5f64).exp());
        for m in p.exact_marginals().unwrap() {
            assert!((m - expected).abs() < 1e-12);
            assert!((m - 0.26894).abs() < 1e-5);
        }
        let p = single_edge(1.0, 0.0);
        let marg = p.exact_marginals().unwrap();
        assert!((marg[0] - 0.5).abs() < 1e-12 && (marg[1] - 0.5).abs() < 1e-12);
        let probs = p.exact_probabilities().unwrap();
        let same = probs[0b00] + probs[0b11];
        let e = std::f64::consts::E;
        assert!((same - e / (e + 1.0 / e)).abs() < 1e-12);
        assert!((same - 0.88080).abs() < 1e-5);
    }

    #[test]
    fn marginals_factorize_over_components() {
        let g = ItemGraph::new(4, [(0, 1), (2, 3)]).unwrap();
        let p = IsingPrior::new(g, vec![0.7, -0.4], vec![0.2, -0.1, 0.3, 0.05]).unwrap();
        let joint = p.exact_marginals().unwrap();
        let a = IsingPrior::new(ItemGraph::new(2, [(0, 1)]).unwrap(), vec![0.7], vec![0.2, -0.1])
            .unwrap()
            .exact_marginals()
            .unwrap();
        let b = IsingPrior::new(ItemGraph::new(2, [(0, 1)]).unwrap(), vec![-0.4], vec![0.3, 0.05])
            .unwrap()
            .exact_marginals()
            .unwrap();
        for (x, y) in joint.iter().zip(a.iter().chain(&b)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_budget() {
        let p = IsingPrior::uniform(ItemGraph::empty(21), 0.0, 0.0).unwrap();
        assert!(matches!(p.exact_marginals(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn flip_gain_matches_recomputation() {
        let g = build_grid(4, 5).unwrap();
        let m = g.num_edges();
        let lambda: Vec<f64> = (0..m).map(|e| 0.3 + 0.1 * (e % 7) as f64 - 0.25).collect();
        let phi: Vec<f64> = (0..20).map(|j| 0.05 * (j % 5) as f64).collect();
        let p = IsingPrior::new(g, lambda, phi).unwrap();
        let mut rng = seed::rng(42);
        for _ in 0..1000 {
            let mut u: Vec<bool> = (0..20).map(|_| rng.gen()).collect();
            let j = rng.gen_range(0..20);
            u[j] = false;
            let off = p.log_weight(&u);
            u[j] = true;
            let on = p.log_weight(&u);
            assert!((on - off - p.flip_gain(&u, j)).abs() < 1e-10);
        }
    }

    #[test]
    fn gibbs_is_deterministic() {
        let p = IsingPrior::uniform(build_grid(5, 5).unwrap(), 0.5, 0.1).unwrap();
        assert_eq!(p.gibbs_sample(20, 99).unwrap(), p.gibbs_sample(20, 99).unwrap());
        assert!(p.gibbs_sample(0, 1).is_err());
    }

    #[test]
    fn gibbs_independent_sites_strong_field() {
        let p = IsingPrior::uniform(ItemGraph::empty(10), 0.0, 5.0).unwrap();
        let samples = p.gibbs_chains(100, 7, 1000).unwrap();
        let ones: usize = samples.iter().map(|u| u.weight()).sum();
        let frac = ones as f64 / (10.0 * 1000.0);
        let expected = 1.0 / (1.0 + 10f64.exp());
        assert!((expected - 4.54e-5).abs() < 1e-7);
        assert!((frac - expected).abs() < 0.01, "{frac}");
    }

    #[test]
    fn gibbs_marginals_on_single_edge() {
        // P(11) ∝ e^{λ−2φ}, P(00) ∝ e^{λ+2φ}, P(10) = P(01) ∝ e^{−λ}
        let p = single_edge(0.8, 0.3);
        let w = [(0.8f64 + 0.6).exp(), (-0.8f64).exp(), (-0.8f64).exp(), (0.8f64 - 0.6).exp()];
        let exact = (w[1] + w[3]) / w.iter().sum::<f64>();
        let est = p.gibbs_marginals(4000, 100, 3, 8).unwrap();
        for m in est {
            assert!((m - exact).abs() < 0.02, "{m} vs {exact}");
        }
        assert!(p.gibbs_marginals(10, 10, 3, 1).is_err());
    }
}
