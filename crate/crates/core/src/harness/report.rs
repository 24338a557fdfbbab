use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::milp::SolveStatus;

use super::config::ExperimentConfig;

/// One decode of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub t: usize,
    pub rho: f64,
    pub decoder: String,
    pub relaxed: bool,
    pub trial: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    /// `1.0` on a failed decode.
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub time_s: f64,
    pub status: SolveStatus,
    pub failed: bool,
}

/// Means over the trials of one `(t, rho, decoder)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub t: usize,
    pub rho: f64,
    pub decoder: String,
    pub relaxed: bool,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub time_s: f64,
    pub trials: usize,
    /// Trials whose decode failed; they enter the means as `1.0`.
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config: ExperimentConfig,
    pub rng: String,
    pub seed_hash: String,
    pub version: String,
    pub n: usize,
    pub edges: usize,
    /// Defectives in the fixed truth.
    pub truth_weight: usize,
    /// Gibbs draws needed to get a non-empty truth.
    pub truth_draws: usize,
    /// Inclusion probability actually used.
    pub p: f64,
    /// Sweep parameter and value for mismatch runs.
    #[serde(default)]
    pub sweep: Option<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<SummaryRow>,
    #[serde(default)]
    pub trials: Option<Vec<TrialRow>>,
}

pub const SUMMARY_COLUMNS: [&str; 9] =
    ["t", "rho", "decoder", "relaxed", "fp_rate", "fn_rate", "time_s", "trials", "failures"];
pub const TRIAL_COLUMNS: [&str; 12] = [
    "t", "rho", "decoder", "relaxed", "trial", "false_pos", "false_neg", "fp_rate", "fn_rate",
    "time_s", "status", "failed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => invalid(format!("unknown format {other:?} (csv, json)")),
        }
    }
}

impl ExperimentReport {
    /// Copy with every wall-time field set to zero.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.rows.iter_mut().for_each(|row| row.time_s = 0.0);
        if let Some(t) = &mut r.trials {
            t.iter_mut().for_each(|row| row.time_s = 0.0);
        }
        r
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_summary_csv(&self.rows, None, w)
    }

    pub fn write_trials_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRIAL_COLUMNS)?;
        for r in self.trials.iter().flatten() {
            out.serialize((
                r.t, r.rho, &r.decoder, r.relaxed, r.trial, r.false_pos, r.false_neg, r.fp_rate,
                r.fn_rate, r.time_s, r.status.to_string(), r.failed,
            ))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn emit(&self, format: ReportFormat, w: impl Write) -> Result<()> {
        match format {
            ReportFormat::Csv => self.write_csv(w),
            ReportFormat::Json => self.write_json(w),
        }
    }

    pub fn emit_to_path(&self, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.emit(format, std::io::BufWriter::new(f))
    }
}

/// Summary rows as CSV, optionally prefixed by a sweep column.
pub(crate) fn write_summary_csv(
    rows: &[SummaryRow],
    sweep: Option<(&str, &[f64])>,
    w: impl Write,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = Vec::new();
    if let Some((name, _)) = sweep {
        header.push(name);
    }
    header.extend(SUMMARY_COLUMNS);
    out.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec: Vec<String> = Vec::new();
        if let Some((_, values)) = sweep {
            rec.push(values[i].to_string());
        }
        rec.extend([
            r.t.to_string(),
            r.rho.to_string(),
            r.decoder.clone(),
            r.relaxed.to_string(),
            r.fp_rate.to_string(),
            r.fn_rate.to_string(),
            r.time_s.to_string(),
            r.trials.to_string(),
            r.failures.to_string(),
        ]);
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses summary CSV written by [`ExperimentReport::write_csv`].
pub fn read_summary_csv(r: impl Read) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != SUMMARY_COLUMNS {
        return invalid(format!("unexpected summary header {header:?}"));
    }
    rdr.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Reports of one sweep, one block per parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: String,
    pub blocks: Vec<(f64, ExperimentReport)>,
}

impl SweepReport {
    pub fn without_timing(&self) -> Self {
        Self {
            parameter: self.parameter.clone(),
            blocks: self.blocks.iter().map(|(v, r)| (*v, r.without_timing())).collect(),
        }
    }

    pub fn emit(&self, format: ReportFormat, w: impl Write) -> Result<()> {
        match format {
            ReportFormat::Json => {
                serde_json::to_writer_pretty(w, self)?;
                Ok(())
            }
            ReportFormat::Csv => {
                let mut values = Vec::new();
                let mut rows = Vec::new();
                for (v, r) in &self.blocks {
                    for row in &r.rows {
                        values.push(*v);
                        rows.push(row.clone());
                    }
                }
                write_summary_csv(&rows, Some((&self.parameter, &values)), w)
            }
        }
    }
}
