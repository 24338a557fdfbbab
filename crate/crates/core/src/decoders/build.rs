//! Integer programs for the sparsity and Ising MAP decoders.
//!
//! Variable layout: `u_0 .. u_{n-1}`, then one product variable per edge
//! (Ising only), then one flip indicator `ξ_i` per test (noisy only).

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::milp::{MilpModel, Relation};
use crate::prior::IsingPrior;
use crate::testing::{NoiseSpec, OutcomeVector, TestDesign};

/// How a negative test is tied to its flip indicator in the noisy programs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeTestForm {
    /// `u_j ≤ ξ_i` for every item in the test, so `ξ_i` is exactly the
    /// indicator that the noiseless outcome was positive.
    #[default]
    FlipIndicator,
    /// `Σ_j X_ij u_j = ξ_i`; also forbids two defectives in one negative test.
    Equality,
}

/// Column indices of a built decoder program.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelLayout {
    pub n: usize,
    pub edges: usize,
    pub flips: usize,
}

impl ModelLayout {
    pub fn item(&self, j: usize) -> usize {
        j
    }

    pub fn edge(&self, e: usize) -> usize {
        self.n + e
    }

    pub fn flip(&self, i: usize) -> usize {
        self.n + self.edges + i
    }
}

fn check_inputs(design: &TestDesign, y: &OutcomeVector, noise: NoiseSpec) -> Result<()> {
    check_dim(design.t(), y.len())?;
    noise.validate()
}

fn check_penalty(noise: NoiseSpec, penalty: f64) -> Result<()> {
    if noise.is_noisy() && !(penalty.is_finite() && penalty > 0.0) {
        return invalid(format!("flip penalty must be finite and positive, got {penalty}"));
    }
    Ok(())
}

/// Adds the outcome rows and, when noisy, the flip indicators with cost
/// `penalty` each.
fn add_outcome_rows(
    m: &mut MilpModel,
    design: &TestDesign,
    y: &OutcomeVector,
    noise: NoiseSpec,
    penalty: f64,
    form: NegativeTestForm,
) {
    let noisy = noise.is_noisy();
    let flips: Vec<usize> = if noisy {
        // with binary u and a positive penalty the optimal ξ is the 0/1
        // flip indicator, so integrality is only marked on items
        (0..design.t()).map(|_| m.add_var(penalty, 0.0, 1.0, false)).collect()
    } else {
        Vec::new()
    };
    for i in 0..design.t() {
        let items: Vec<(usize, f64)> = design.row_items(i).map(|j| (j, 1.0)).collect();
        match (y.y[i], noisy) {
            (false, false) => m.add_constraint(items, Relation::Eq, 0.0),
            (true, false) => m.add_constraint(items, Relation::Ge, 1.0),
            (true, true) => {
                let mut terms = items;
                terms.push((flips[i], 1.0));
                m.add_constraint(terms, Relation::Ge, 1.0);
            }
            (false, true) => match form {
                NegativeTestForm::Equality => {
                    let mut terms = items;
                    terms.push((flips[i], -1.0));
                    m.add_constraint(terms, Relation::Eq, 0.0);
                }
                NegativeTestForm::FlipIndicator => {
                    for (j, _) in items {
                        m.add_constraint(vec![(j, 1.0), (flips[i], -1.0)], Relation::Le, 0.0);
                    }
                }
            },
        }
    }
}

/// `minimize Σ u_j (+ penalty·Σ ξ_i)` over the group-testing constraints.
pub fn build_sparsity_model(
    design: &TestDesign,
    y: &OutcomeVector,
    noise: NoiseSpec,
    penalty: f64,
    relaxed: bool,
    form: NegativeTestForm,
) -> Result<(MilpModel, ModelLayout)> {
    check_inputs(design, y, noise)?;
    check_penalty(noise, penalty)?;
    let mut m = MilpModel::new();
    for _ in 0..design.n() {
        m.add_var(1.0, 0.0, 1.0, !relaxed);
    }
    add_outcome_rows(&mut m, design, y, noise, penalty, form);
    let flips = if noise.is_noisy() { design.t() } else { 0 };
    Ok((m, ModelLayout { n: design.n(), edges: 0, flips }))
}

/// Linearized Ising MAP program. For binary `u` with `u_e = u_j u_j'` and
/// `ξ` the flip indicators, the objective equals
/// `−log P̃(u) + penalty·Σξ + prior.objective_offset()`, where `P̃` is the
/// unnormalized prior.
pub fn build_ising_linearized_model(
    design: &TestDesign,
    y: &OutcomeVector,
    prior: &IsingPrior,
    noise: NoiseSpec,
    penalty: f64,
    relaxed: bool,
    form: NegativeTestForm,
) -> Result<(MilpModel, ModelLayout)> {
    check_inputs(design, y, noise)?;
    check_dim(design.n(), prior.n())?;
    check_penalty(noise, penalty)?;
    let n = design.n();
    let mut cost: Vec<f64> = prior.phi().iter().map(|&p| 2.0 * p).collect();
    for (&(a, b), &l) in prior.graph().edges().iter().zip(prior.lambda()) {
        cost[a] += 2.0 * l;
        cost[b] += 2.0 * l;
    }
    let mut m = MilpModel::new();
    for c in cost {
        m.add_var(c, 0.0, 1.0, !relaxed);
    }
    for (&(a, b), &l) in prior.graph().edges().iter().zip(prior.lambda()) {
        // binary endpoints pin u_e to their product, so it needs no mark
        let e = m.add_var(-4.0 * l, 0.0, 1.0, false);
        m.add_constraint(vec![(e, 1.0), (a, -1.0)], Relation::Le, 0.0);
        m.add_constraint(vec![(e, 1.0), (b, -1.0)], Relation::Le, 0.0);
        m.add_constraint(vec![(a, 1.0), (b, 1.0), (e, -1.0)], Relation::Le, 1.0);
    }
    add_outcome_rows(&mut m, design, y, noise, penalty, form);
    let flips = if noise.is_noisy() { design.t() } else { 0 };
    Ok((m, ModelLayout { n, edges: prior.graph().num_edges(), flips }))
}

/// Number of observed outcomes that differ from the noiseless outcomes of `u`.
pub fn flip_count(design: &TestDesign, y: &OutcomeVector, u: &[bool]) -> usize {
    design.noiseless_outcomes(u).iter().zip(&y.y).filter(|(a, b)| a != b).count()
}

/// Negative log-posterior of `u` up to a constant:
/// `−log P̃(u) + penalty·(#flips)`. `penalty` is ignored when noiseless.
pub fn quadratic_objective(
    prior: &IsingPrior,
    design: &TestDesign,
    y: &OutcomeVector,
    noise: NoiseSpec,
    penalty: f64,
    u: &[bool],
) -> f64 {
    let flips = if noise.is_noisy() { flip_count(design, y, u) as f64 * penalty } else { 0.0 };
    -prior.log_weight(u) + flips
}

/// Full assignment of a built program induced by a binary `u`: products on
/// edges and flip indicators for the observed outcomes.
pub fn lift_assignment(
    layout: &ModelLayout,
    prior: Option<&IsingPrior>,
    design: &TestDesign,
    y: &OutcomeVector,
    u: &[bool],
) -> Vec<f64> {
    let mut x: Vec<f64> = u.iter().map(|&b| f64::from(u8::from(b))).collect();
    if let Some(p) = prior {
        for &(a, b) in p.graph().edges() {
            x.push(f64::from(u8::from(u[a] && u[b])));
        }
    }
    if layout.flips > 0 {
        let clean = design.noiseless_outcomes(u);
        for (c, o) in clean.iter().zip(&y.y) {
            x.push(f64::from(u8::from(c != o)));
        }
    }
    x
}
