use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::decoders::{DecoderFamily, NegativeTestForm};
use crate::error::{invalid, Result};
use crate::prior::{build_block, build_grid, load_edge_list, subsample_vertices, ItemGraph};
use crate::seed::derive_seed;
use crate::testing::NoiseSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Grid { rows: usize, cols: usize },
    /// `block_rows x block_cols` disjoint grids of `rows x cols` each.
    Block { block_rows: usize, block_cols: usize, rows: usize, cols: usize },
    /// Edge-list file, optionally reduced to the subgraph induced by
    /// `subsample` uniformly chosen vertices.
    EdgeList { path: PathBuf, subsample: Option<usize> },
}

impl GraphSpec {
    pub fn build(&self, base_seed: u64) -> Result<ItemGraph> {
        match self {
            GraphSpec::Grid { rows, cols } => build_grid(*rows, *cols),
            GraphSpec::Block { block_rows, block_cols, rows, cols } => {
                build_block(*block_rows, *block_cols, *rows, *cols)
            }
            GraphSpec::EdgeList { path, subsample } => {
                let g = load_edge_list(path)?;
                match subsample {
                    Some(m) => subsample_vertices(&g, *m, derive_seed(base_seed, "subsample", &[])),
                    None => Ok(g),
                }
            }
        }
    }
}

/// How the fixed ground truth is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub sweeps: usize,
    /// Gibbs seed; derived from the base seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for TruthSpec {
    fn default() -> Self {
        Self { sweeps: 1000, seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderChoice {
    pub family: DecoderFamily,
    #[serde(default)]
    pub relaxed: bool,
    /// Flip weight override; family default otherwise.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub negative_tests: NegativeTestForm,
}

impl DecoderChoice {
    pub fn new(family: DecoderFamily, relaxed: bool) -> Self {
        Self { family, relaxed, eta: None, negative_tests: NegativeTestForm::default() }
    }

    pub fn all_four() -> Vec<Self> {
        let mut v = Vec::new();
        for relaxed in [false, true] {
            v.push(Self::new(DecoderFamily::Sparsity, relaxed));
            v.push(Self::new(DecoderFamily::IsingMap, relaxed));
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub lambda: f64,
    pub phi: f64,
    #[serde(default)]
    pub truth: TruthSpec,
    /// Numbers of tests to sweep.
    pub tests: Vec<usize>,
    /// Inclusion probability; `ln 2 / k` of the drawn truth when absent.
    #[serde(default)]
    pub p: Option<f64>,
    /// Flip probabilities; `0` means noiseless.
    pub rho: Vec<f64>,
    pub decoders: Vec<DecoderChoice>,
    pub trials: usize,
    pub base_seed: u64,
    /// Use the identity design (one test per item) instead of Bernoulli.
    #[serde(default)]
    pub identity_design: bool,
    #[serde(default)]
    pub node_limit: Option<usize>,
    /// Keep per-trial rows in the report.
    #[serde(default)]
    pub dump_trials: bool,
}

impl ExperimentConfig {
    /// 10x10 grid, 10 trials: the default size for quick runs.
    pub fn ci_grid() -> Self {
        Self {
            graph: GraphSpec::Grid { rows: 10, cols: 10 },
            lambda: 0.5,
            phi: 0.006,
            truth: TruthSpec::default(),
            tests: vec![20, 40, 60, 80],
            p: None,
            rho: vec![0.0, 0.01],
            decoders: DecoderChoice::all_four(),
            trials: 10,
            base_seed: 1,
            identity_design: false,
            node_limit: None,
            dump_trials: false,
        }
    }

    /// 28x28 grid, λ = 0.5, φ = 0.006, 100..500 tests, 50 trials. Exact
    /// Ising search at this size rarely closes, so it stops after 100 nodes
    /// and reports its incumbent.
    pub fn full_grid() -> Self {
        Self {
            graph: GraphSpec::Grid { rows: 28, cols: 28 },
            tests: (1..=5).map(|i| 100 * i).collect(),
            trials: 50,
            node_limit: Some(100),
            ..Self::ci_grid()
        }
    }

    /// Sixteen 7x7 grids in a 4x4 arrangement, λ = 0.6, φ = 0.035.
    pub fn full_block() -> Self {
        Self {
            graph: GraphSpec::Block { block_rows: 4, block_cols: 4, rows: 7, cols: 7 },
            lambda: 0.6,
            phi: 0.035,
            ..Self::full_grid()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ci-grid" => Ok(Self::ci_grid()),
            "full-grid" => Ok(Self::full_grid()),
            "full-block" => Ok(Self::full_block()),
            other => invalid(format!("unknown preset {other:?} (ci-grid, full-grid, full-block)")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.tests.is_empty() || self.tests.contains(&0) {
            return invalid("tests must be a non-empty list of positive counts");
        }
        if self.rho.is_empty() {
            return invalid("rho list is empty");
        }
        for &r in &self.rho {
            NoiseSpec::symmetric(r)?;
        }
        if self.decoders.is_empty() {
            return invalid("no decoders configured");
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p <= 1.0) {
                return invalid(format!("p = {p} outside (0, 1]"));
            }
        }
        if !self.lambda.is_finite() || !self.phi.is_finite() {
            return invalid("lambda and phi must be finite");
        }
        if self.truth.sweeps == 0 {
            return invalid("truth sweeps must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn noise(rho: f64) -> NoiseSpec {
        if rho == 0.0 {
            NoiseSpec::Noiseless
        } else {
            NoiseSpec::Symmetric { rho }
        }
    }
}
