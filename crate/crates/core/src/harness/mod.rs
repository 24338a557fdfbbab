//! Trial loops over a fixed ground truth, mismatch sweeps and report output.
//!
//! Trial `i` draws one Bernoulli matrix with `max(tests)` rows from
//! `derive_seed(base, "design", [i])`; smaller test counts use its leading
//! rows, so designs are shared by every decoder, noise level and `t`. Noise
//! for trial `i` at flip probability `ρ` uses
//! `derive_seed(base, "noise", [i, ρ.to_bits()])`.

mod config;
mod report;
mod run;

pub use config::{DecoderChoice, ExperimentConfig, GraphSpec, TruthSpec};
pub use report::{
    read_summary_csv, ExperimentReport, ReportFormat, ReportMetadata, SummaryRow, SweepReport,
    TrialRow, SUMMARY_COLUMNS, TRIAL_COLUMNS,
};
pub use run::{
    design_seed, noise_seed, run_experiment, run_graph_mismatch, run_lambda_mismatch,
    sample_truth, summarize,
};
