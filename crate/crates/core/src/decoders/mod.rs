//! Decoding rules: sparsity and Ising MAP integer programs (and their LP
//! relaxations), an exhaustive MAP reference, and the information-density
//! threshold decoder.

mod build;
mod map;
mod start;
mod threshold;

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use build::{
    build_ising_linearized_model, build_sparsity_model, flip_count, lift_assignment,
    quadratic_objective, ModelLayout, NegativeTestForm,
};
pub use map::{brute_force_map, MapEstimate};
pub use threshold::{
    info_density, threshold_decode, CandidateFamily, ThresholdOutcome, DEFAULT_DELTA,
    MAX_FAMILY_SIZE, MAX_THRESHOLD_K,
};

use crate::error::{invalid, Result};
use crate::items::DefectivityVector;
use crate::milp::{solve_ilp_from, solve_ilp_with, solve_lp_with, SolveStatus, SolverOptions};
use crate::prior::IsingPrior;
use crate::testing::{NoiseSpec, OutcomeVector, TestDesign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderFamily {
    /// Fewest defectives consistent with the outcomes; ignores the graph.
    Sparsity,
    /// Maximum a posteriori under the Ising prior.
    IsingMap,
}

impl fmt::Display for DecoderFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderFamily::Sparsity => "sparsity",
            DecoderFamily::IsingMap => "ising_map",
        })
    }
}

/// `log((1−ρ)/ρ)`: cost of one flipped outcome in the Ising MAP objective.
pub fn flip_penalty(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) {
        return invalid(format!("flip probability {rho} outside (0, 0.5)"));
    }
    Ok(((1.0 - rho) / rho).ln())
}

/// `log((1−ρ)/ρ) / log((1−q)/q)`: flip weight of the sparsity decoder that
/// makes it MAP under an i.i.d. prior with defect probability `q`.
pub fn sparsity_eta(rho: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 0.5) {
        return invalid(format!("defect probability {q} outside (0, 0.5)"));
    }
    Ok(flip_penalty(rho)? / ((1.0 - q) / q).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSpec {
    pub family: DecoderFamily,
    pub relaxed: bool,
    pub noise: NoiseSpec,
    /// Flip weight; `None` selects the family default.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Defect probability used for the default sparsity flip weight.
    #[serde(default)]
    pub defect_rate: Option<f64>,
    /// Required for `IsingMap`.
    #[serde(default)]
    pub prior: Option<IsingPrior>,
    #[serde(default)]
    pub negative_tests: NegativeTestForm,
}

impl DecoderSpec {
    pub fn sparsity(noise: NoiseSpec, relaxed: bool) -> Self {
        Self {
            family: DecoderFamily::Sparsity,
            relaxed,
            noise,
            eta: None,
            defect_rate: None,
            prior: None,
            negative_tests: NegativeTestForm::default(),
        }
    }

    pub fn ising_map(prior: IsingPrior, noise: NoiseSpec, relaxed: bool) -> Self {
        Self {
            family: DecoderFamily::IsingMap,
            relaxed,
            noise,
            eta: None,
            defect_rate: None,
            prior: Some(prior),
            negative_tests: NegativeTestForm::default(),
        }
    }

    /// Flip weight actually used, or `None` when noiseless.
    pub fn resolved_eta(&self) -> Result<Option<f64>> {
        self.noise.validate()?;
        if !self.noise.is_noisy() {
            return Ok(None);
        }
        let eta = match (self.eta, self.family) {
            (Some(e), _) => e,
            (None, DecoderFamily::IsingMap) => flip_penalty(self.noise.rho())?,
            (None, DecoderFamily::Sparsity) => match self.defect_rate {
                Some(q) => sparsity_eta(self.noise.rho(), q)?,
                None => return invalid("sparsity decoder needs eta or defect_rate under noise"),
            },
        };
        if !(eta.is_finite() && eta > 0.0) {
            return invalid(format!("flip weight must be finite and positive, got {eta}"));
        }
        Ok(Some(eta))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.resolved_eta()?;
        if self.family == DecoderFamily::IsingMap {
            match &self.prior {
                None => return invalid("ising_map decoder needs a prior"),
                Some(p) if p.n() != n => {
                    return invalid(format!("prior has {} items, design has {n}", p.n()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Short label such as `ising_map` or `sparsity_relaxed`.
    pub fn label(&self) -> String {
        if self.relaxed {
            format!("{}_relaxed", self.family)
        } else {
            self.family.to_string()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeOutcome {
    Estimate { estimate: DefectivityVector },
    /// No estimate was produced, e.g. noiseless outcomes inconsistent with
    /// every candidate.
    Failure { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub outcome: DecodeOutcome,
    /// Program objective at the returned point (NaN on failure).
    pub objective_value: f64,
    pub status: SolveStatus,
    pub nodes: usize,
    /// Seconds spent in the solver.
    pub wall_time: f64,
    pub spec: DecoderSpec,
}

impl DecodeResult {
    pub fn estimate(&self) -> Option<&DefectivityVector> {
        match &self.outcome {
            DecodeOutcome::Estimate { estimate } => Some(estimate),
            DecodeOutcome::Failure { .. } => None,
        }
    }
}

/// Maps a relaxed value to `{0, 1}`; `0.5` goes to 1.
pub fn round_coordinate(v: f64) -> bool {
    v >= 0.5
}

pub fn decode(spec: &DecoderSpec, design: &TestDesign, y: &OutcomeVector) -> Result<DecodeResult> {
    decode_with(spec, design, y, SolverOptions::default())
}

pub fn decode_with(
    spec: &DecoderSpec,
    design: &TestDesign,
    y: &OutcomeVector,
    opts: SolverOptions,
) -> Result<DecodeResult> {
    spec.validate(design.n())?;
    let eta = spec.resolved_eta()?.unwrap_or(0.0);
    let (model, layout) = match spec.family {
        DecoderFamily::Sparsity => {
            build_sparsity_model(design, y, spec.noise, eta, spec.relaxed, spec.negative_tests)?
        }
        DecoderFamily::IsingMap => {
            let prior = spec.prior.as_ref().expect("validated");
            build_ising_linearized_model(design, y, prior, spec.noise, eta, spec.relaxed, spec.negative_tests)?
        }
    };
    let start = Instant::now();
    let sol = match (spec.relaxed, &spec.prior) {
        (true, _) => solve_lp_with(&model, opts)?,
        (false, Some(prior)) if spec.family == DecoderFamily::IsingMap => {
            let form = spec.negative_tests;
            match start::ising_start(&model, &layout, prior, design, y, spec.noise, eta, form, opts) {
                Some(x0) => solve_ilp_from(&model, opts, &x0)?,
                None => solve_ilp_with(&model, opts)?,
            }
        }
        (false, _) => solve_ilp_with(&model, opts)?,
    };
    let wall_time = start.elapsed().as_secs_f64();

    let outcome = if sol.has_point() {
        let bits = sol.x[..design.n()].iter().map(|&v| round_coordinate(v)).collect();
        DecodeOutcome::Estimate { estimate: DefectivityVector::new(bits) }
    } else {
        DecodeOutcome::Failure { reason: format!("solver status {}", sol.status) }
    };
    Ok(DecodeResult {
        outcome,
        objective_value: sol.objective_value,
        status: sol.status,
        nodes: sol.nodes_explored,
        wall_time,
        spec: spec.clone(),
    })
}
