//! Exhaustive MAP search, the reference for the integer programs.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::items::DefectivityVector;
use crate::prior::{IsingPrior, ENUMERATION_LIMIT};
use crate::testing::{NoiseSpec, OutcomeVector, TestDesign};

use super::flip_penalty;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapEstimate {
    pub estimate: DefectivityVector,
    /// `−log P̃(u) + log((1−ρ)/ρ)·(#flips)`; the linearized program's optimum
    /// exceeds this by `prior.objective_offset()`.
    pub objective: f64,
}

/// Enumerates all `2^n` vectors. Returns `None` when no vector is consistent
/// with noiseless outcomes. Ties go to the lexicographically smallest vector
/// (item 0 most significant).
pub fn brute_force_map(
    design: &TestDesign,
    y: &OutcomeVector,
    prior: &IsingPrior,
    noise: NoiseSpec,
) -> Result<Option<MapEstimate>> {
    let n = design.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
    }
    check_dim(n, prior.n())?;
    check_dim(design.t(), y.len())?;
    noise.validate()?;
    let penalty = if noise.is_noisy() { flip_penalty(noise.rho())? } else { 0.0 };

    // bit (n-1-j) of a code is item j, so increasing codes are lexicographic
    let bit = |j: usize| 1u32 << (n - 1 - j);
    let rows: Vec<u32> = (0..design.t())
        .map(|i| design.row_items(i).fold(0, |acc, j| acc | bit(j)))
        .collect();
    let edges: Vec<(u32, u32, f64)> = prior
        .graph()
        .edges()
        .iter()
        .zip(prior.lambda())
        .map(|(&(a, b), &l)| (bit(a), bit(b), l))
        .collect();
    let spin = |set: bool| if set { 1.0 } else { -1.0 };

    let mut best: Option<(u32, f64)> = None;
    'codes: for code in 0u32..(1u32 << n) {
        let mut flips = 0usize;
        for (&row, &obs) in rows.iter().zip(&y.y) {
            if (row & code != 0) != obs {
                if !noise.is_noisy() {
                    continue 'codes;
                }
                flips += 1;
            }
        }
        let pair: f64 = edges
            .iter()
            .map(|&(a, b, l)| l * spin(code & a != 0) * spin(code & b != 0))
            .sum();
        let field: f64 = (0..n).map(|j| prior.phi()[j] * spin(code & bit(j) != 0)).sum();
        let objective = -(pair - field) + penalty * flips as f64;
        if best.is_none_or(|(_, b)| objective < b - 1e-12) {
            best = Some((code, objective));
        }
    }
    Ok(best.map(|(code, objective)| MapEstimate {
        estimate: DefectivityVector::new((0..n).map(|j| code & bit(j) != 0).collect()),
        objective,
    }))
}
