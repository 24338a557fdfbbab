//! Feasible starting point for the Ising MAP program.

use crate::milp::{solve_ilp_with, MilpModel, SolverOptions};
use crate::prior::IsingPrior;
use crate::testing::{NoiseSpec, OutcomeVector, TestDesign};

use super::build::{build_sparsity_model, lift_assignment, ModelLayout, NegativeTestForm};

/// Objective of `u` tracked through per-test defective counts, so a single
/// flip costs its degree plus the tests it sits in.
struct FlipSearch<'a> {
    prior: &'a IsingPrior,
    y: &'a OutcomeVector,
    noisy: bool,
    form: NegativeTestForm,
    penalty: f64,
    tests_of: Vec<Vec<usize>>,
    counts: Vec<usize>,
}

impl FlipSearch<'_> {
    fn allowed(&self, i: usize, count: usize) -> bool {
        match (self.noisy, self.y.y[i]) {
            (false, obs) => (count > 0) == obs,
            (true, false) => self.form == NegativeTestForm::FlipIndicator || count <= 1,
            (true, true) => true,
        }
    }

    /// Objective change from flipping item `j`, `None` if that breaks a row.
    fn delta(&self, u: &[bool], j: usize) -> Option<f64> {
        let gain = self.prior.flip_gain(u, j);
        let mut d = if u[j] { gain } else { -gain };
        for &i in &self.tests_of[j] {
            let (old, new) = (self.counts[i], if u[j] { self.counts[i] - 1 } else { self.counts[i] + 1 });
            if !self.allowed(i, new) {
                return None;
            }
            if self.noisy {
                let flipped = |c: usize| f64::from(u8::from((c > 0) != self.y.y[i]));
                d += self.penalty * (flipped(new) - flipped(old));
            }
        }
        Some(d)
    }

    fn flip(&mut self, u: &mut [bool], j: usize) {
        for &i in &self.tests_of[j] {
            if u[j] {
                self.counts[i] -= 1;
            } else {
                self.counts[i] += 1;
            }
        }
        u[j] = !u[j];
    }
}

/// The sparsity program's solution under the same outcome rows, improved by
/// single-item flips while the Ising objective drops. `None` when neither it
/// nor the empty set is feasible.
#[allow(clippy::too_many_arguments)]
pub(crate) fn ising_start(
    model: &MilpModel,
    layout: &ModelLayout,
    prior: &IsingPrior,
    design: &TestDesign,
    y: &OutcomeVector,
    noise: NoiseSpec,
    penalty: f64,
    form: NegativeTestForm,
    opts: SolverOptions,
) -> Option<Vec<f64>> {
    let n = design.n();
    let (sparse, _) = build_sparsity_model(design, y, noise, penalty, false, form).ok()?;
    let mut u: Vec<bool> = match solve_ilp_with(&sparse, opts) {
        Ok(sol) if sol.has_point() => sol.x[..n].iter().map(|&v| v > 0.5).collect(),
        _ => vec![false; n],
    };
    let mut tests_of = vec![Vec::new(); n];
    let mut counts = vec![0; design.t()];
    for i in 0..design.t() {
        for j in design.row_items(i) {
            tests_of[j].push(i);
            counts[i] += usize::from(u[j]);
        }
    }
    let mut search = FlipSearch { prior, y, noisy: noise.is_noisy(), form, penalty, tests_of, counts };
    if !(0..design.t()).all(|i| search.allowed(i, search.counts[i])) {
        return None;
    }
    loop {
        let mut improved = false;
        for j in 0..n {
            if search.delta(&u, j).is_some_and(|d| d < -1e-9) {
                search.flip(&mut u, j);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    let x = lift_assignment(layout, Some(prior), design, y, &u);
    (model.max_violation(&x) <= opts.feasibility_tol).then_some(x)
}
