use rayon::prelude::*;

use crate::decoders::{decode_with, DecoderFamily, DecoderSpec};
use crate::error::{invalid, Error, Result};
use crate::items::{count_fp_fn, DefectivityVector};
use crate::milp::SolverOptions;
use crate::prior::{perturb_edges, IsingPrior, ItemGraph};
use crate::seed::{derive_seed, RNG_ID, SEED_HASH_ID};
use crate::testing::{bernoulli_design, run_tests, TestDesign};

use super::config::{DecoderChoice, ExperimentConfig};
use super::report::{ExperimentReport, ReportMetadata, SummaryRow, SweepReport, TrialRow};

const MAX_TRUTH_DRAWS: usize = 100;

/// The fixed truth: the first Gibbs draw with at least one defective, draw
/// `a` seeded by `derive_seed(seed, "truth", [a])`. Returns the vector and
/// the number of draws used.
pub fn sample_truth(prior: &IsingPrior, config: &ExperimentConfig) -> Result<(DefectivityVector, usize)> {
    let seed = config.truth.seed.unwrap_or(config.base_seed);
    for attempt in 0..MAX_TRUTH_DRAWS {
        let u = prior.gibbs_sample(config.truth.sweeps, derive_seed(seed, "truth", &[attempt as u64]))?;
        if u.weight() > 0 {
            return Ok((u, attempt + 1));
        }
    }
    Err(Error::Numerical(format!("no defective in {MAX_TRUTH_DRAWS} truth draws")))
}

pub fn design_seed(base_seed: u64, trial: usize) -> u64 {
    derive_seed(base_seed, "design", &[trial as u64])
}

pub fn noise_seed(base_seed: u64, trial: usize, rho: f64) -> u64 {
    derive_seed(base_seed, "noise", &[trial as u64, rho.to_bits()])
}

struct Setup {
    graph: ItemGraph,
    truth_prior: IsingPrior,
    truth: DefectivityVector,
    draws: usize,
    p: f64,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    config.validate()?;
    let graph = config.graph.build(config.base_seed)?;
    let truth_prior = IsingPrior::uniform(graph.clone(), config.lambda, config.phi)?;
    let (truth, draws) = sample_truth(&truth_prior, config)?;
    let p = config.p.unwrap_or_else(|| (std::f64::consts::LN_2 / truth.weight() as f64).min(1.0));
    if config.identity_design && config.tests.iter().any(|&t| t != graph.n()) {
        return invalid("identity design needs every test count equal to n");
    }
    Ok(Setup { graph, truth_prior, truth, draws, p })
}

fn decoder_spec(
    choice: &DecoderChoice,
    rho: f64,
    decoder_prior: &IsingPrior,
    defect_rate: f64,
) -> DecoderSpec {
    let noise = ExperimentConfig::noise(rho);
    let mut spec = match choice.family {
        DecoderFamily::Sparsity => DecoderSpec::sparsity(noise, choice.relaxed),
        DecoderFamily::IsingMap => {
            DecoderSpec::ising_map(decoder_prior.clone(), noise, choice.relaxed)
        }
    };
    spec.eta = choice.eta;
    spec.negative_tests = choice.negative_tests;
    if spec.family == DecoderFamily::Sparsity {
        spec.defect_rate = Some(defect_rate);
    }
    spec
}

fn run_with_prior(
    config: &ExperimentConfig,
    s: &Setup,
    decoder_prior: &IsingPrior,
    sweep: Option<(String, f64)>,
) -> Result<ExperimentReport> {
    let n = s.graph.n();
    let q = s.truth.weight() as f64 / n as f64;
    let opts = SolverOptions {
        node_limit: config.node_limit.unwrap_or(SolverOptions::default().node_limit),
        ..SolverOptions::default()
    };
    // check every spec up front so configuration errors are not per-trial
    for &rho in &config.rho {
        for choice in &config.decoders {
            decoder_spec(choice, rho, decoder_prior, q).validate(n)?;
        }
    }

    let per_trial: Vec<Vec<TrialRow>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<TrialRow>> {
            let max_t = *config.tests.iter().max().expect("validated");
            let full = if config.identity_design {
                TestDesign::identity(n)
            } else {
                bernoulli_design(max_t, n, s.p, design_seed(config.base_seed, trial))?
            };
            let mut rows = Vec::new();
            for &t in &config.tests {
                let design = full.first_rows(t);
                for &rho in &config.rho {
                    let noise = ExperimentConfig::noise(rho);
                    let y = run_tests(&design, &s.truth, noise, noise_seed(config.base_seed, trial, rho))?;
                    for choice in &config.decoders {
                        let spec = decoder_spec(choice, rho, decoder_prior, q);
                        let result = decode_with(&spec, &design, &y, opts)?;
                        let row = match result.estimate() {
                            Some(est) => {
                                let e = count_fp_fn(&s.truth, est)?;
                                TrialRow {
                                    t,
                                    rho,
                                    decoder: spec.label(),
                                    relaxed: spec.relaxed,
                                    trial,
                                    false_pos: e.false_pos,
                                    false_neg: e.false_neg,
                                    fp_rate: e.fp_rate.expect("truth is non-empty"),
                                    fn_rate: e.fn_rate.expect("truth is non-empty"),
                                    time_s: result.wall_time,
                                    status: result.status,
                                    failed: false,
                                }
                            }
                            None => TrialRow {
                                t,
                                rho,
                                decoder: spec.label(),
                                relaxed: spec.relaxed,
                                trial,
                                false_pos: 0,
                                false_neg: 0,
                                fp_rate: 1.0,
                                fn_rate: 1.0,
                                time_s: result.wall_time,
                                status: result.status,
                                failed: true,
                            },
                        };
                        rows.push(row);
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    // (t, rho, decoder, trial) order
    let cells = config.tests.len() * config.rho.len() * config.decoders.len();
    let mut ordered: Vec<TrialRow> = Vec::with_capacity(cells * config.trials);
    for cell in 0..cells {
        for rows in &per_trial {
            ordered.push(rows[cell].clone());
        }
    }
    let rows = summarize(&ordered, config.trials);

    Ok(ExperimentReport {
        metadata: ReportMetadata {
            config: config.clone(),
            rng: RNG_ID.to_string(),
            seed_hash: SEED_HASH_ID.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            n,
            edges: decoder_prior.graph().num_edges(),
            truth_weight: s.truth.weight(),
            truth_draws: s.draws,
            p: s.p,
            sweep,
        },
        rows,
        trials: config.dump_trials.then_some(ordered),
    })
}

/// Means over consecutive blocks of `trials` rows.
pub fn summarize(ordered: &[TrialRow], trials: usize) -> Vec<SummaryRow> {
    ordered
        .chunks(trials)
        .map(|chunk| {
            let mean = |f: fn(&TrialRow) -> f64| chunk.iter().map(f).sum::<f64>() / chunk.len() as f64;
            SummaryRow {
                t: chunk[0].t,
                rho: chunk[0].rho,
                decoder: chunk[0].decoder.clone(),
                relaxed: chunk[0].relaxed,
                fp_rate: mean(|r| r.fp_rate),
                fn_rate: mean(|r| r.fn_rate),
                time_s: mean(|r| r.time_s),
                trials: chunk.len(),
                failures: chunk.iter().filter(|r| r.failed).count(),
            }
        })
        .collect()
}

/// Fixed truth, fresh design per trial shared by every `t`, `rho` and
/// decoder; the decoders assume the true graph and parameters.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = setup(config)?;
    let prior = s.truth_prior.clone();
    run_with_prior(config, &s, &prior, None)
}

/// Truth from the true graph; decoders see the graph with a `fraction` of
/// its edges moved, seeded by `derive_seed(base, "perturb", [fraction bits])`.
pub fn run_graph_mismatch(config: &ExperimentConfig, fractions: &[f64]) -> Result<SweepReport> {
    if fractions.iter().any(|f| !(0.0..=0.5).contains(f)) {
        return invalid("edge fractions must lie in [0, 0.5]");
    }
    let s = setup(config)?;
    let blocks = fractions
        .iter()
        .map(|&f| {
            let g = perturb_edges(&s.graph, f, derive_seed(config.base_seed, "perturb", &[f.to_bits()]))?;
            let prior = IsingPrior::uniform(g, config.lambda, config.phi)?;
            Ok((f, run_with_prior(config, &s, &prior, Some(("fraction".into(), f)))?))
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport { parameter: "fraction".into(), blocks })
}

/// Truth at the configured `λ`; decoders assume each listed value instead.
pub fn run_lambda_mismatch(config: &ExperimentConfig, lambdas: &[f64]) -> Result<SweepReport> {
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return invalid("assumed lambda values must be positive");
    }
    let s = setup(config)?;
    let blocks = lambdas
        .iter()
        .map(|&l| {
            let prior = s.truth_prior.with_lambda(l)?;
            Ok((l, run_with_prior(config, &s, &prior, Some(("lambda".into(), l)))?))
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport { parameter: "lambda".into(), blocks })
}
