//! Information-density threshold decoder over an explicit candidate family
//! (noiseless tests, Bernoulli design).

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::items::{distance_unchecked, DefectiveSet};
use crate::testing::{OutcomeVector, TestDesign};

/// Largest `k` accepted by [`threshold_decode`]; partitions grow as `2^k`.
pub const MAX_THRESHOLD_K: usize = 12;
/// Largest family accepted by [`threshold_decode`].
pub const MAX_FAMILY_SIZE: usize = 200;
pub const DEFAULT_DELTA: f64 = 0.01;

/// Distinct candidate sets of a common size `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateFamily {
    sets: Vec<DefectiveSet>,
    k: usize,
}

impl CandidateFamily {
    pub fn new(sets: Vec<DefectiveSet>) -> Result<Self> {
        let Some(first) = sets.first() else {
            return invalid("candidate family is empty");
        };
        let (k, n) = (first.len(), first.n());
        for s in &sets {
            if s.len() != k || s.n() != n {
                return invalid("candidates must share size and item count");
            }
        }
        let mut sorted: Vec<_> = sets.iter().map(|s| s.members().clone()).collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("candidates must be distinct");
        }
        Ok(Self { sets, k })
    }

    /// All `k`-subsets of `items`.
    pub fn all_subsets(n: usize, items: &[usize], k: usize) -> Result<Self> {
        let mut sets = Vec::new();
        let mut idx: Vec<usize> = (0..k).collect();
        if k > items.len() {
            return invalid("subset size exceeds the item pool");
        }
        loop {
            sets.push(DefectiveSet::new(n, idx.iter().map(|&i| items[i]))?);
            let Some(pos) = (0..k).rev().find(|&p| idx[p] < items.len() - k + p) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
        Self::new(sets)
    }

    pub fn sets(&self) -> &[DefectiveSet] {
        &self.sets
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.sets[0].n()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `N_τ = max_S |{S' ∈ family : d(S, S') = τ}|` for `τ = 0..=k`.
    pub fn n_tau(&self) -> Vec<usize> {
        let mut best = vec![0usize; self.k + 1];
        for a in &self.sets {
            let mut counts = vec![0usize; self.k + 1];
            for b in &self.sets {
                counts[distance_unchecked(a, b)] += 1;
            }
            for (m, c) in best.iter_mut().zip(counts) {
                *m = (*m).max(c);
            }
        }
        best
    }

    /// `log2 |family| / (k log2(n/k))`.
    pub fn beta(&self) -> f64 {
        let (n, k) = (self.n() as f64, self.k as f64);
        (self.len() as f64).log2() / (k * (n / k).log2())
    }
}

/// Per-test `log2 P(y | x_dif, x_eq) − log2 P(y | x_eq)`; `−∞` when the
/// observation is impossible given both parts.
fn test_density(hit_dif: bool, hit_eq: bool, y: bool, miss_prob: f64) -> f64 {
    let joint = hit_dif || hit_eq;
    if joint != y {
        return f64::NEG_INFINITY;
    }
    if hit_eq {
        return 0.0;
    }
    let p_pos = 1.0 - miss_prob;
    if y {
        -p_pos.log2()
    } else {
        -miss_prob.log2()
    }
}

fn density_unchecked(
    design: &TestDesign,
    y: &OutcomeVector,
    dif: &[usize],
    eq: &[usize],
    p: f64,
) -> f64 {
    let miss = (1.0 - p).powi(dif.len() as i32);
    let mut total = 0.0;
    for i in 0..design.t() {
        let row = design.row(i);
        let hit_dif = dif.iter().any(|&j| row[j]);
        let hit_eq = eq.iter().any(|&j| row[j]);
        total += test_density(hit_dif, hit_eq, y.y[i], miss);
        if total == f64::NEG_INFINITY {
            break;
        }
    }
    total
}

/// Information density `i(X_dif; Y | X_eq)` in bits, summed over tests.
pub fn info_density(
    design: &TestDesign,
    y: &OutcomeVector,
    s_dif: &DefectiveSet,
    s_eq: &DefectiveSet,
    p: f64,
) -> Result<f64> {
    check_dim(design.t(), y.len())?;
    check_dim(design.n(), s_dif.n())?;
    check_dim(design.n(), s_eq.n())?;
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("inclusion probability {p} outside (0, 1)"));
    }
    if s_dif.iter().any(|j| s_eq.contains(j)) {
        return invalid("s_dif and s_eq overlap");
    }
    let dif: Vec<usize> = s_dif.iter().collect();
    let eq: Vec<usize> = s_eq.iter().collect();
    let v = density_unchecked(design, y, &dif, &eq, p);
    if v == f64::NEG_INFINITY {
        return Err(Error::ModelViolation(
            "an observed outcome has zero probability under the noiseless model".into(),
        ));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    Unique { set: DefectiveSet },
    NoCandidate,
    Multiple { count: usize },
}

impl ThresholdOutcome {
    pub fn set(&self) -> Option<&DefectiveSet> {
        match self {
            ThresholdOutcome::Unique { set } => Some(set),
            _ => None,
        }
    }
}

/// Accepts the candidates whose density passes `γ_τ = log2(k N_τ / δ)` for
/// every split with `|s_dif| = τ > d_max`; thresholds with `N_τ = 0` are
/// vacuous. Zero or several accepted candidates are reported as errors.
pub fn threshold_decode(
    family: &CandidateFamily,
    design: &TestDesign,
    y: &OutcomeVector,
    d_max: usize,
    delta: f64,
    p: f64,
) -> Result<ThresholdOutcome> {
    let k = family.k();
    if k > MAX_THRESHOLD_K || family.len() > MAX_FAMILY_SIZE {
        return invalid(format!(
            "family too large for exhaustive thresholding (k = {k}, |S| = {})",
            family.len()
        ));
    }
    check_dim(design.n(), family.n())?;
    check_dim(design.t(), y.len())?;
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta {delta} outside (0, 1)"));
    }
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("inclusion probability {p} outside (0, 1)"));
    }
    let n_tau = family.n_tau();
    let gamma: Vec<Option<f64>> = n_tau
        .iter()
        .map(|&c| (c > 0).then(|| (k as f64 * c as f64 / delta).log2()))
        .collect();

    let mut accepted: Vec<&DefectiveSet> = Vec::new();
    for s in family.sets() {
        let items: Vec<usize> = s.iter().collect();
        let passes = (1u32..(1u32 << k)).all(|mask| {
            let tau = mask.count_ones() as usize;
            let Some(threshold) = gamma[tau].filter(|_| tau > d_max) else {
                return true;
            };
            let (dif, eq): (Vec<usize>, Vec<usize>) = {
                let mut dif = Vec::with_capacity(tau);
                let mut eq = Vec::with_capacity(k - tau);
                for (b, &j) in items.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        dif.push(j);
                    } else {
                        eq.push(j);
                    }
                }
                (dif, eq)
            };
            density_unchecked(design, y, &dif, &eq, p) >= threshold
        });
        if passes {
            accepted.push(s);
        }
    }
    Ok(match accepted.len() {
        0 => ThresholdOutcome::NoCandidate,
        1 => ThresholdOutcome::Unique { set: accepted[0].clone() },
        count => ThresholdOutcome::Multiple { count },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;
    use crate::testing::bernoulli_design;
    use rand::Rng;

    fn set(n: usize, m: &[usize]) -> DefectiveSet {
        DefectiveSet::new(n, m.iter().copied()).unwrap()
    }

    #[test]
    fn family_validation() {
        assert!(CandidateFamily::new(vec![]).is_err());
        assert!(CandidateFamily::new(vec![set(4, &[0, 1]), set(4, &[2])]).is_err());
        assert!(CandidateFamily::new(vec![set(4, &[0, 1]), set(4, &[1, 0])]).is_err());
        let f = CandidateFamily::all_subsets(8, &[0, 1, 2, 3, 4], 2).unwrap();
        assert_eq!(f.len(), 10);
    }

    #[test]
    fn n_tau_of_all_pairs() {
        // pairs from 5 items: one at distance 0, 6 share one item, 3 disjoint
        let f = CandidateFamily::all_subsets(5, &[0, 1, 2, 3, 4], 2).unwrap();
        assert_eq!(f.n_tau(), vec![1, 6, 3]);
    }

    #[test]
    fn single_candidate_always_returned() {
        let f = CandidateFamily::new(vec![set(6, &[1, 4])]).unwrap();
        let d = bernoulli_design(5, 6, 0.3, 1).unwrap();
        let y = OutcomeVector::new(vec![true, false, true, false, false]);
        let out = threshold_decode(&f, &d, &y, 0, DEFAULT_DELTA, 0.3).unwrap();
        assert_eq!(out.set(), Some(&set(6, &[1, 4])));
    }

    #[test]
    fn density_with_hit_eq_item_is_zero() {
        let d = TestDesign::from_rows(3, &[vec![1, 1, 0]]).unwrap();
        let y = OutcomeVector::new(vec![true]);
        let v = info_density(&d, &y, &set(3, &[1]), &set(3, &[0]), 0.2).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn density_untouched_negative_test() {
        let p: f64 = 0.2;
        let d = TestDesign::from_rows(3, &[vec![0, 0, 1]]).unwrap();
        let y = OutcomeVector::new(vec![false]);
        let v = info_density(&d, &y, &set(3, &[1]), &set(3, &[0]), p).unwrap();
        assert!((v + (1.0 - p).log2()).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_impossible_outcomes() {
        let d = TestDesign::from_rows(3, &[vec![1, 0, 0]]).unwrap();
        let y = OutcomeVector::new(vec![false]);
        assert!(matches!(
            info_density(&d, &y, &set(3, &[0]), &set(3, &[1]), 0.2),
            Err(Error::ModelViolation(_))
        ));
        assert!(info_density(&d, &y, &set(3, &[0]), &set(3, &[0]), 0.2).is_err());
    }

    #[test]
    fn full_tolerance_with_single_candidate_succeeds() {
        let f = CandidateFamily::new(vec![set(5, &[0, 3])]).unwrap();
        let mut r = rng(3);
        for trial in 0..20 {
            let d = bernoulli_design(8, 5, 0.35, trial).unwrap();
            let y = OutcomeVector::new((0..8).map(|_| r.gen_bool(0.5)).collect());
            let out = threshold_decode(&f, &d, &y, 2, DEFAULT_DELTA, 0.35).unwrap();
            assert!(out.set().is_some());
        }
    }
}
