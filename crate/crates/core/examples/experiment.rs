//! A reduced trial protocol followed by a prior-strength mismatch sweep.

use gtprior::harness::{run_experiment, run_lambda_mismatch, ExperimentConfig, GraphSpec, ReportFormat};

fn main() -> gtprior::Result<()> {
    let mut c = ExperimentConfig::ci_grid();
    c.graph = GraphSpec::Grid { rows: 8, cols: 8 };
    c.tests = vec![20, 40];
    c.trials = 3;
    let report = run_experiment(&c)?;
    println!("truth weight {}, p = {:.4}", report.metadata.truth_weight, report.metadata.p);
    report.emit(ReportFormat::Csv, std::io::stdout())?;

    c.rho = vec![0.01];
    let sweep = run_lambda_mismatch(&c, &[0.1, 0.5, 1.5])?;
    sweep.emit(ReportFormat::Csv, std::io::stdout())?;
    Ok(())
}
