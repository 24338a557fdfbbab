use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gtprior::bounds::{emit_rate_curves, evaluate_bounds, rate_curves, BoundQuery};
use gtprior::decoders::{decode_with, DecoderSpec, NegativeTestForm};
use gtprior::harness::{
    run_experiment, run_graph_mismatch, run_lambda_mismatch, ExperimentConfig, GraphSpec,
    ReportFormat,
};
use gtprior::items::{count_fp_fn, DefectivityVector, ErrorReport};
use gtprior::milp::SolverOptions;
use gtprior::prior::IsingPrior;
use gtprior::testing::{bernoulli_design, run_tests, NoiseSpec, OutcomeVector, TestDesign};
use gtprior::Error;

#[derive(Parser)]
#[command(name = "gtprior", version, about = "Group testing with Ising-model priors")]
struct Cli {
    /// Base seed; overrides `base_seed` of a config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Experiment config as a JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Bernoulli test design.
    Design {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: usize,
        /// Inclusion probability; `ln 2 / k` when only `--k` is given.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Gibbs samples from the Ising prior on a graph.
    SamplePrior {
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        #[arg(long, default_value_t = 1)]
        chains: usize,
    },
    /// Decode outcomes of a design file.
    Decode {
        /// Design CSV written by `design`.
        #[arg(long)]
        design: PathBuf,
        /// Observed outcomes as a 0/1 string.
        #[arg(long, conflicts_with = "truth")]
        outcomes: Option<String>,
        /// Simulate outcomes from this 0/1 truth and score the estimate.
        #[arg(long)]
        truth: Option<String>,
        #[arg(long, value_enum, default_value_t = Family::IsingMap)]
        decoder: Family,
        #[arg(long)]
        relaxed: bool,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        /// Flip weight override.
        #[arg(long)]
        eta: Option<f64>,
        /// Defect probability for the default sparsity flip weight.
        #[arg(long)]
        defect_rate: Option<f64>,
        /// Use `Σ u = ξ` for noisy negative tests.
        #[arg(long)]
        equality_negatives: bool,
        #[arg(long)]
        node_limit: Option<usize>,
        #[command(flatten)]
        prior: PriorArgs,
    },
    /// Asymptotic test-count coefficients and rates.
    Bounds {
        #[arg(long, default_value_t = 0.1)]
        alpha_star: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Fixed `ν`; optimized when absent.
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        /// Rate curves over `α*, β ∈ {step, 2·step, ..} ∩ (0, 1)` instead.
        #[arg(long)]
        grid: Option<f64>,
    },
    /// Run the trial protocol of a config or preset.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decoders see a graph with a fraction of its edges moved.
    MismatchGraph {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5])]
        fractions: Vec<f64>,
    },
    /// Decoders assume each listed `λ` instead of the true one.
    MismatchLambda {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.5, 2.0])]
        lambdas: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sparsity,
    IsingMap,
}

#[derive(Args)]
struct PriorArgs {
    /// Grid graph as `ROWSxCOLS`.
    #[arg(long, default_value = "10x10")]
    grid: String,
    /// Edge-list file; replaces `--grid`.
    #[arg(long)]
    edge_list: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 0.006)]
    phi: f64,
}

#[derive(Args)]
struct RunArgs {
    /// ci-grid, full-grid or full-block; ignored with `--config`.
    #[arg(long, default_value = "ci-grid")]
    preset: String,
    #[arg(long)]
    trials: Option<usize>,
    /// Keep per-trial rows (JSON output).
    #[arg(long)]
    dump_trials: bool,
}

fn parse_dims(s: &str) -> gtprior::Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("expected ROWSxCOLS, got {s:?}"));
    let (r, c) = s.split_once('x').ok_or_else(bad)?;
    Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
}

impl PriorArgs {
    fn build(&self, seed: u64) -> gtprior::Result<IsingPrior> {
        let spec = match &self.edge_list {
            Some(path) => GraphSpec::EdgeList { path: path.clone(), subsample: None },
            None => {
                let (rows, cols) = parse_dims(&self.grid)?;
                GraphSpec::Grid { rows, cols }
            }
        };
        IsingPrior::uniform(spec.build(seed)?, self.lambda, self.phi)
    }
}

fn bits(s: &str) -> gtprior::Result<Vec<bool>> {
    Ok(s.parse::<DefectivityVector>()?.bits().to_vec())
}

struct Ctx {
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Format,
    config: Option<PathBuf>,
}

impl Ctx {
    fn writer(&self) -> gtprior::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }

    fn json(&self, v: &serde_json::Value) -> gtprior::Result<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn experiment_config(&self, run: &RunArgs) -> gtprior::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => serde_json::from_reader(BufReader::new(File::open(p)?))?,
            None => ExperimentConfig::preset(&run.preset)?,
        };
        if let Some(s) = self.seed {
            c.base_seed = s;
        }
        if let Some(t) = run.trials {
            c.trials = t;
        }
        c.dump_trials |= run.dump_trials;
        Ok(c)
    }
}

fn run(cli: Cli) -> gtprior::Result<()> {
    let ctx = Ctx { seed: cli.seed, out: cli.out, format: cli.format, config: cli.config };
    let seed = ctx.seed.unwrap_or(1);
    match cli.command {
        Command::Design { t, n, p, k } => {
            let p = match (p, k) {
                (Some(p), _) => p,
                (None, Some(k)) if k > 0 => (std::f64::consts::LN_2 / k as f64).min(1.0),
                _ => return Err(Error::InvalidArgument("give --p or a positive --k".into())),
            };
            let d = bernoulli_design(t, n, p, seed)?;
            match ctx.format {
                Format::Csv => {
                    let mut w = ctx.writer()?;
                    d.write_csv(&mut w)?;
                    w.flush()?;
                }
                Format::Json => ctx.json(&d.to_json())?,
            }
        }
        Command::SamplePrior { prior, sweeps, chains } => {
            let prior = prior.build(seed)?;
            let samples = prior.gibbs_chains(sweeps, seed, chains)?;
            match ctx.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(ctx.writer()?);
                    w.write_record(["chain", "weight", "u"])?;
                    for (i, u) in samples.iter().enumerate() {
                        w.serialize((i, u.weight(), u.to_bitstring()))?;
                    }
                    w.flush()?;
                }
                Format::Json => {
                    let rows: Vec<_> = samples
                        .iter()
                        .enumerate()
                        .map(|(i, u)| json!({"chain": i, "weight": u.weight(), "u": u.to_bitstring()}))
                        .collect();
                    ctx.json(&json!({"sweeps": sweeps, "seed": seed, "samples": rows}))?;
                }
            }
        }
        Command::Decode {
            design,
            outcomes,
            truth,
            decoder,
            relaxed,
            rho,
            eta,
            defect_rate,
            equality_negatives,
            node_limit,
            prior,
        } => {
            let design = TestDesign::read_csv(BufReader::new(File::open(design)?))?;
            let noise = if rho == 0.0 { NoiseSpec::Noiseless } else { NoiseSpec::symmetric(rho)? };
            let truth = truth.map(|s| s.parse::<DefectivityVector>()).transpose()?;
            let y = match (&outcomes, &truth) {
                (Some(s), _) => OutcomeVector::new(bits(s)?),
                (None, Some(u)) => run_tests(&design, u, noise, seed)?,
                (None, None) => {
                    return Err(Error::InvalidArgument("give --outcomes or --truth".into()))
                }
            };
            let mut spec = match decoder {
                Family::Sparsity => DecoderSpec::sparsity(noise, relaxed),
                Family::IsingMap => DecoderSpec::ising_map(prior.build(seed)?, noise, relaxed),
            };
            spec.eta = eta;
            spec.defect_rate = defect_rate;
            if equality_negatives {
                spec.negative_tests = NegativeTestForm::Equality;
            }
            let opts = SolverOptions {
                node_limit: node_limit.unwrap_or(SolverOptions::default().node_limit),
                ..SolverOptions::default()
            };
            let r = decode_with(&spec, &design, &y, opts)?;
            let estimate = r.estimate().map(DefectivityVector::to_bitstring);
            let errors = match (&truth, r.estimate()) {
                (Some(u), Some(e)) => Some(ErrorReport { wall_time: r.wall_time, ..count_fp_fn(u, e)? }),
                _ => None,
            };
            match ctx.format {
                Format::Json => ctx.json(&json!({
                    "decoder": spec.label(),
                    "status": r.status.to_string(),
                    "objective": r.objective_value,
                    "nodes": r.nodes,
                    "time_s": r.wall_time,
                    "outcomes": y.to_bitstring(),
                    "estimate": estimate,
                    "errors": errors,
                }))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(ctx.writer()?);
                    w.write_record(["decoder", "status", "objective", "nodes", "time_s", "estimate", "false_pos", "false_neg"])?;
                    w.serialize((
                        spec.label(),
                        r.status.to_string(),
                        r.objective_value,
                        r.nodes,
                        r.wall_time,
                        estimate.unwrap_or_default(),
                        errors.as_ref().map(|e| e.false_pos),
                        errors.as_ref().map(|e| e.false_neg),
                    ))?;
                    w.flush()?;
                }
            }
        }
        Command::Bounds { alpha_star, beta, nu, n, k, grid } => match grid {
            Some(step) => {
                if !(step > 0.0 && step < 1.0) {
                    return Err(Error::InvalidArgument("--grid step must lie in (0, 1)".into()));
                }
                let points: Vec<f64> = (1..)
                    .map(|i| i as f64 * step)
                    .take_while(|&v| v < 1.0 - 1e-12)
                    .collect();
                let rows = rate_curves(&points, &points)?;
                match ctx.format {
                    Format::Csv => {
                        let mut w = ctx.writer()?;
                        emit_rate_curves(&rows, &mut w)?;
                        w.flush()?;
                    }
                    Format::Json => ctx.json(&serde_json::to_value(rows)?)?,
                }
            }
            None => {
                let q = BoundQuery { theta: None, beta, alpha_star, nu, n, k };
                let r = evaluate_bounds(&q)?;
                match ctx.format {
                    Format::Json => ctx.json(&json!({"query": q, "result": r}))?,
                    Format::Csv => {
                        let mut w = csv::Writer::from_writer(ctx.writer()?);
                        w.write_record(["alpha_star", "beta", "nu", "coefficient", "converse_coefficient", "rate_s", "rate_nk", "tests", "converse_tests", "log_k_term"])?;
                        w.serialize((
                            alpha_star,
                            beta,
                            r.nu_used,
                            r.coefficient,
                            r.converse_coefficient,
                            r.rate_s,
                            r.rate_nk,
                            r.tests,
                            r.converse_tests,
                            r.log_k_term,
                        ))?;
                        w.flush()?;
                    }
                }
            }
        },
        Command::Experiment { run } => {
            let c = ctx.experiment_config(&run)?;
            let report = run_experiment(&c)?;
            let mut w = ctx.writer()?;
            report.emit(ctx.format.into(), &mut w)?;
            w.flush()?;
        }
        Command::MismatchGraph { run, fractions } => {
            let c = ctx.experiment_config(&run)?;
            let report = run_graph_mismatch(&c, &fractions)?;
            let mut w = ctx.writer()?;
            report.emit(ctx.format.into(), &mut w)?;
            w.flush()?;
        }
        Command::MismatchLambda { run, lambdas } => {
            let c = ctx.experiment_config(&run)?;
            let report = run_lambda_mismatch(&c, &lambdas)?;
            let mut w = ctx.writer()?;
            report.emit(ctx.format.into(), &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) | Error::ModelViolation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
