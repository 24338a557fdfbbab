//! Information-theoretic test counts for Bernoulli designs with
//! `p = ν/k`: entropy helpers, the conditional mutual information of a
//! partial split, achievability and converse coefficients for a prior known
//! only through its cardinality, and the optimal `ν`.
//!
//! Coefficients multiply `k log2(n/k)`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Error, Result};

const NU_BRACKET: (f64, f64) = (1e-6, 50.0);
const NU_RESIDUAL: f64 = 1e-10;

/// `H2(x) = x log2(1/x) + (1−x) log2(1/(1−x))`, with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("entropy argument {x} outside [0, 1]"));
    }
    Ok(h2(x))
}

fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Large-`k` limit `e^{−(1−α)ν} H2(e^{−αν})` of the mutual information
/// between the outcome and a fraction `α` of the defectives, given the rest.
pub fn mi_asymptotic(alpha: f64, nu: f64) -> f64 {
    (-(1.0 - alpha) * nu).exp() * h2((-alpha * nu).exp())
}

/// Same quantity at finite `k` with `τ` items in the unknown part:
/// `(1−p)^{k−τ} H2((1−p)^τ)`.
pub fn mi_finite(k: usize, tau: usize, p: f64) -> f64 {
    let miss = 1.0 - p;
    miss.powi((k - tau) as i32) * h2(miss.powi(tau as i32))
}

/// `log2 C(k, τ) + log2 C(n−k, τ)`, the default count of sets at distance `τ`.
pub fn log2_n_tau_default(n: u64, k: u64, tau: u64) -> Result<f64> {
    if k > n || tau > k || tau > n - k {
        return invalid(format!("need τ ≤ k and τ ≤ n − k (n = {n}, k = {k}, τ = {tau})"));
    }
    Ok((ln_binomial(k, tau) + ln_binomial(n - k, tau)) / std::f64::consts::LN_2)
}

fn nu_equation(nu: f64, m: f64) -> f64 {
    let x = (-nu * m).exp();
    h2(x) + m * (1.0 - x).log2()
}

/// Root in `ν` of `H2(e^{−νm}) + m log2(1 − e^{−νm}) = 0`, the minimizer of
/// the achievability coefficient at `m = max{α*, β}`.
pub fn optimal_nu(m: f64) -> Result<f64> {
    if !(m > 0.0 && m <= 1.0) {
        return invalid(format!("m = {m} outside (0, 1]"));
    }
    let (mut lo, mut hi) = NU_BRACKET;
    let (flo, fhi) = (nu_equation(lo, m), nu_equation(hi, m));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Numerical(format!(
            "no sign change of the ν equation on [{lo}, {hi}] for m = {m} (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = nu_equation(mid, m);
        if f.abs() < NU_RESIDUAL {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!("bisection for ν stalled at m = {m}")))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return invalid(format!("{name} = {v} outside (0, 1)"));
    }
    Ok(())
}

/// `min{α, β} / (e^{−(1−α)ν} H2(e^{−αν}))`, the test-count coefficient
/// contributed by splits with a fraction `α` of unknown defectives.
pub fn split_coefficient(alpha: f64, beta: f64, nu: f64) -> f64 {
    alpha.min(beta) / mi_asymptotic(alpha, nu)
}

/// Largest [`split_coefficient`] over an evenly spaced grid on `[α*, 1]`;
/// returns `(argmax, max)`.
pub fn split_coefficient_grid_max(alpha_star: f64, beta: f64, nu: f64, points: usize) -> (f64, f64) {
    let step = (1.0 - alpha_star) / (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|i| {
            let a = alpha_star + step * i as f64;
            (a, split_coefficient(a, beta, nu))
        })
        .fold((alpha_star, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// `β e^{ν(1−m)} / H2(e^{−νm})` with `m = max{α*, β}`; `ν` defaults to the
/// optimum for that `m`. Returns `(coefficient, ν used)`.
pub fn achievability_coefficient(alpha_star: f64, beta: f64, nu: Option<f64>) -> Result<(f64, f64)> {
    check_unit("alpha_star", alpha_star)?;
    check_unit("beta", beta)?;
    let m = alpha_star.max(beta);
    let nu = match nu {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return invalid(format!("nu = {v} must be positive")),
        None => optimal_nu(m)?,
    };
    Ok((beta * (nu * (1.0 - m)).exp() / h2((-nu * m).exp()), nu))
}

/// `max{0, β − α*}`.
pub fn converse_coefficient(alpha_star: f64, beta: f64) -> Result<f64> {
    check_unit("alpha_star", alpha_star)?;
    check_unit("beta", beta)?;
    Ok((beta - alpha_star).max(0.0))
}

/// Limits of `log2|S| / t` and `log2 C(n,k) / t` at the optimal `ν`.
pub fn rate_limits(alpha_star: f64, beta: f64) -> Result<(f64, f64)> {
    check_unit("alpha_star", alpha_star)?;
    check_unit("beta", beta)?;
    let m = alpha_star.max(beta);
    let rate_s = rate_at(m, optimal_nu(m)?);
    Ok((rate_s, rate_s / beta))
}

/// `(ν*, H2(e^{−ν*m}) / e^{ν*(1−m)})` for `m ∈ (0, 1]`; the second entry is
/// the limit of `log2|S| / t` as a function of `m = max{α*, β}` alone.
pub fn limiting_rate(m: f64) -> Result<(f64, f64)> {
    let nu = optimal_nu(m)?;
    Ok((nu, rate_at(m, nu)))
}

fn rate_at(m: f64, nu: f64) -> f64 {
    h2((-nu * m).exp()) / (nu * (1.0 - m)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    /// `k = Θ(n^θ)`; informational.
    pub theta: Option<f64>,
    pub beta: f64,
    pub alpha_star: f64,
    pub nu: Option<f64>,
    pub n: Option<u64>,
    pub k: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub coefficient: f64,
    pub converse_coefficient: f64,
    /// `coefficient · k log2(n/k)` when `n` and `k` are given.
    pub tests: Option<f64>,
    pub converse_tests: Option<f64>,
    /// The `2 log2 k` lower-order term of the finite-`k` condition, reported
    /// on its own rather than folded into `tests`.
    pub log_k_term: Option<f64>,
    pub rate_s: f64,
    pub rate_nk: f64,
    pub nu_used: f64,
    /// `⌊α* k⌋` when `k` is given.
    pub d_max: Option<u64>,
}

pub fn evaluate_bounds(q: &BoundQuery) -> Result<BoundResult> {
    if let Some(theta) = q.theta {
        check_unit("theta", theta)?;
    }
    let (coefficient, nu_used) = achievability_coefficient(q.alpha_star, q.beta, q.nu)?;
    let converse = converse_coefficient(q.alpha_star, q.beta)?;
    let m = q.alpha_star.max(q.beta);
    let rate_s = rate_at(m, nu_used);
    let scale = match (q.n, q.k) {
        (Some(n), Some(k)) if k >= 1 && k < n => Some(k as f64 * (n as f64 / k as f64).log2()),
        (None, None) => None,
        _ => return invalid("n and k must be given together with 1 ≤ k < n"),
    };
    Ok(BoundResult {
        coefficient,
        converse_coefficient: converse,
        tests: scale.map(|s| coefficient * s),
        converse_tests: scale.map(|s| converse * s),
        log_k_term: q.k.filter(|_| scale.is_some()).map(|k| 2.0 * (k as f64).log2()),
        rate_s,
        rate_nk: rate_s / q.beta,
        nu_used,
        d_max: q.k.map(|k| (q.alpha_star * k as f64).floor() as u64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub alpha_star: f64,
    pub beta: f64,
    pub m: f64,
    pub nu_star: f64,
    pub rate_s: f64,
    pub rate_nk: f64,
}

/// One row per `(α*, β)` pair, in input order.
pub fn rate_curves(alpha_star: &[f64], beta: &[f64]) -> Result<Vec<RateRow>> {
    let mut rows = Vec::with_capacity(alpha_star.len() * beta.len());
    for &a in alpha_star {
        for &b in beta {
            let (rate_s, rate_nk) = rate_limits(a, b)?;
            let m = a.max(b);
            rows.push(RateRow { alpha_star: a, beta: b, m, nu_star: optimal_nu(m)?, rate_s, rate_nk });
        }
    }
    Ok(rows)
}

pub fn emit_rate_curves(rows: &[RateRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha_star", "beta", "m", "nu_star", "rate_s", "rate_nk"])?;
    for r in rows {
        out.serialize((r.alpha_star, r.beta, r.m, r.nu_star, r.rate_s, r.rate_nk))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - 0.811_278_1).abs() < 1e-7);
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn mutual_information_values() {
        assert!((mi_asymptotic(1.0, LN_2) - 1.0).abs() < 1e-12);
        assert!((mi_asymptotic(1.0, 0.3) - h2((-0.3f64).exp())).abs() < 1e-15);
        let r = 2f64.powf(-0.5);
        assert!((mi_asymptotic(0.5, LN_2) - r * h2(r)).abs() < 1e-12);
        assert!((mi_asymptotic(0.5, LN_2) - 0.6170).abs() < 1e-4);
    }

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn default_counts() {
        assert_eq!(log2_n_tau_default(10, 3, 0).unwrap(), 0.0);
        assert!((log2_n_tau_default(5, 2, 1).unwrap() - 6f64.log2()).abs() < 1e-10);
        assert!((log2_n_tau_default(6, 2, 2).unwrap() - 6f64.log2()).abs() < 1e-10);
        for (n, k, tau) in [(30, 7, 4), (50, 10, 10), (40, 20, 13)] {
            let exact = (binom(k, tau) * binom(n - k, tau)).log2();
            assert!((log2_n_tau_default(n, k, tau).unwrap() - exact).abs() < 1e-9);
        }
        assert!(log2_n_tau_default(10, 3, 4).is_err());
        assert!(log2_n_tau_default(6, 5, 2).is_err());
    }

    #[test]
    fn default_count_leading_order() {
        // log2 C(n−k, τ) is sandwiched between τ log2((n−k)/τ) and
        // τ log2(e(n−k)/τ), so its ratio to τ log2(n/τ) tends to 1 slowly
        let (n, k) = (1_000_000u64, 1000u64);
        for tau in [10u64, 100, 1000] {
            let outside = log2_n_tau_default(n, k, tau).unwrap() - ln_binomial(k, tau) / LN_2;
            let lead = tau as f64 * (n as f64 / tau as f64).log2();
            let ratio = outside / lead;
            let slack = std::f64::consts::LOG2_E / (n as f64 / tau as f64).log2();
            assert!(ratio > 0.99 && ratio < 1.0 + slack, "tau {tau}: ratio {ratio}");
        }
        let ratio_at = |n: u64| {
            let tau = 10u64;
            (ln_binomial(n, tau) / LN_2) / (tau as f64 * (n as f64 / tau as f64).log2())
        };
        assert!(ratio_at(1_000_000_000) < ratio_at(1_000_000));
        assert!(ratio_at(1_000_000_000_000) < 1.05);
    }

    #[test]
    fn optimal_nu_fixed_point_and_residual() {
        assert!((optimal_nu(1.0).unwrap() - LN_2).abs() < 1e-6);
        for i in 1..=100 {
            let m = i as f64 / 100.0;
            let nu = optimal_nu(m).unwrap();
            assert!(nu_equation(nu, m).abs() < NU_RESIDUAL);
        }
        let half = optimal_nu(0.5).unwrap();
        assert!(half > LN_2);
        assert!((half - GOLDEN_NU_HALF).abs() < 1e-8, "{half}");
        assert!(optimal_nu(0.0).is_err());
        assert!(optimal_nu(1.5).is_err());
    }

    const GOLDEN_NU_HALF: f64 = 0.703_357_530_1;

    #[test]
    fn optimal_nu_minimizes_coefficient() {
        for &(a, b) in &[(0.1, 0.5), (0.3, 0.2), (0.6, 0.9), (0.05, 0.05)] {
            let (best, nu) = achievability_coefficient(a, b, None).unwrap();
            for d in [-0.05, -0.01, 0.01, 0.05] {
                let (other, _) = achievability_coefficient(a, b, Some(nu + d)).unwrap();
                assert!(best <= other + 1e-12);
            }
            let (at_ln2, _) = achievability_coefficient(a, b, Some(LN_2)).unwrap();
            assert!(best <= at_ln2 + 1e-12);
        }
    }

    #[test]
    fn achievability_examples() {
        let (c, _) = achievability_coefficient(0.1, 0.5, Some(LN_2)).unwrap();
        let direct = 0.5 * 2f64.sqrt() / h2(2f64.powf(-0.5));
        assert!((c - direct).abs() < 1e-12);
        assert!((c - 0.8105).abs() < 1e-3);
        let (grid_arg, grid_max) = split_coefficient_grid_max(0.1, 0.5, LN_2, 201);
        assert!((grid_arg - 0.5).abs() <= 0.9 / 200.0 + 1e-12);
        assert!(grid_max <= c + 1e-12 && grid_max > c - 1e-3);
        let (near_one, _) = achievability_coefficient(0.3, 0.999, Some(LN_2)).unwrap();
        assert!((near_one - 1.0).abs() < 0.01);
        // linear in β when m is held fixed by α*
        let (full, _) = achievability_coefficient(0.8, 0.6, Some(0.9)).unwrap();
        let (half, _) = achievability_coefficient(0.8, 0.3, Some(0.9)).unwrap();
        assert!((full / half - 2.0).abs() < 1e-12);
    }

    #[test]
    fn converse_examples() {
        assert!((converse_coefficient(0.2, 0.5).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(converse_coefficient(0.6, 0.5).unwrap(), 0.0);
        assert_eq!(converse_coefficient(0.5, 0.5).unwrap(), 0.0);
        assert!((converse_coefficient(1e-9, 0.4).unwrap() - 0.4).abs() < 1e-8);
    }

    #[test]
    fn rate_properties() {
        let (rs, rnk) = rate_limits(0.5, 0.999_999).unwrap();
        assert!((rs - 1.0).abs() < 1e-5 && (rnk - rs / 0.999_999).abs() < 1e-12);
        // shrinking the smaller parameter leaves the limit unchanged
        let (a, _) = rate_limits(0.7, 0.4).unwrap();
        let (b, _) = rate_limits(0.7, 0.1).unwrap();
        let (c, _) = rate_limits(0.2, 0.7).unwrap();
        assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
        let (_, big) = rate_limits(0.6, 0.2).unwrap();
        let (_, bigger) = rate_limits(0.6, 0.1).unwrap();
        assert!(bigger > big);
        // reciprocal identity with the achievability coefficient
        for &(a, b) in &[(0.1, 0.5), (0.4, 0.3), (0.9, 0.95)] {
            let (rs, _) = rate_limits(a, b).unwrap();
            let (coef, _) = achievability_coefficient(a, b, None).unwrap();
            assert!((1.0 / rs - coef / b).abs() < 1e-9);
        }
    }

    #[test]
    fn rate_at_full_overlap() {
        let (nu, rate) = limiting_rate(1.0).unwrap();
        assert!((nu - LN_2).abs() < 1e-6 && (rate - 1.0).abs() < 1e-6);
        assert!(limiting_rate(0.0).is_err());
    }

    #[test]
    fn rate_curves_shape() {
        let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        let rows = rate_curves(&[0.01], &grid).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].nu_star <= w[0].nu_star + 1e-12);
        }
        assert!(rows.iter().all(|r| r.rate_nk >= 1.0));
        let mut buf = Vec::new();
        emit_rate_curves(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.starts_with("alpha_star,beta,m,nu_star,rate_s,rate_nk"));
    }

    #[test]
    fn query_reports_log_term_separately() {
        let q = BoundQuery { theta: Some(0.5), beta: 0.5, alpha_star: 0.1, nu: None, n: Some(10_000), k: Some(100) };
        let r = evaluate_bounds(&q).unwrap();
        let scale = 100.0 * 100f64.log2();
        assert!((r.tests.unwrap() - r.coefficient * scale).abs() < 1e-9);
        assert!((r.log_k_term.unwrap() - 2.0 * 100f64.log2()).abs() < 1e-12);
        assert_eq!(r.d_max, Some(10));
        assert!(r.coefficient >= r.converse_coefficient);
        let bad = BoundQuery { n: Some(10), k: None, ..q };
        assert!(evaluate_bounds(&bad).is_err());
    }
}
