//! Experiment reports: one block of cross-validation runs per σ value or
//! per (solver, loss) pair, serialised as JSON or as a flat CSV table.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One train/test run of the k-fold protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub fold: usize,
    pub repetition: usize,
    /// Seed handed to the solver (stochastic solvers only use it).
    pub seed: u64,
    pub accuracy: f64,
    pub wall_time_seconds: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub accuracy: Stat,
    pub wall_time_seconds: Stat,
    pub iterations: Stat,
}

impl Summary {
    pub fn of(records: &[RunRecord]) -> Summary {
        let col = |f: fn(&RunRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
        Summary {
            runs: records.len(),
            accuracy: Stat::of(&col(|r| r.accuracy)),
            wall_time_seconds: Stat::of(&col(|r| r.wall_time_seconds)),
            iterations: Stat::of(&col(|r| r.iterations as f64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub solver: String,
    pub loss: String,
    /// Present for losses that have a smoothing parameter.
    pub sigma: Option<f64>,
    pub records: Vec<RunRecord>,
    pub summary: Option<Summary>,
    /// Set instead of records when the block was skipped.
    pub warning: Option<String>,
}

impl Block {
    pub fn completed(solver: &str, loss: &str, sigma: Option<f64>, records: Vec<RunRecord>) -> Block {
        let summary = Some(Summary::of(&records));
        Block {
            solver: solver.into(),
            loss: loss.into(),
            sigma,
            records,
            summary,
            warning: None,
        }
    }

    pub fn skipped(solver: &str, loss: &str, warning: String) -> Block {
        Block {
            solver: solver.into(),
            loss: loss.into(),
            sigma: None,
            records: Vec::new(),
            summary: None,
            warning: Some(warning),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub lambda: f64,
    pub seed: u64,
    pub folds: usize,
    pub repetitions: usize,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

/// Column order of the CSV output; one row per run, or one row per skipped
/// block with only the identifying columns and `warning` filled.
pub const CSV_COLUMNS: [&str; 12] = [
    "solver",
    "loss",
    "sigma",
    "repetition",
    "fold",
    "seed",
    "accuracy",
    "wall_time_seconds",
    "iterations",
    "final_grad_norm",
    "converged",
    "warning",
];

#[derive(Serialize)]
struct CsvRow<'a> {
    solver: &'a str,
    loss: &'a str,
    sigma: Option<f64>,
    repetition: Option<usize>,
    fold: Option<usize>,
    seed: Option<u64>,
    accuracy: Option<f64>,
    wall_time_seconds: Option<f64>,
    iterations: Option<usize>,
    final_grad_norm: Option<f64>,
    converged: Option<bool>,
    warning: Option<&'a str>,
}

impl ExperimentReport {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.blocks.iter().flat_map(|b| b.records.iter())
    }

    pub fn all_converged(&self) -> bool {
        self.records().all(|r| r.converged)
    }

    pub fn write<W: Write>(&self, format: ReportFormat, mut out: W) -> Result<()> {
        match format {
            ReportFormat::Json => {
                serde_json::to_writer_pretty(&mut out, self).map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
            }
            ReportFormat::Csv => self.write_csv(out)?,
        }
        Ok(())
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for b in &self.blocks {
            let base = CsvRow {
                solver: &b.solver,
                loss: &b.loss,
                sigma: b.sigma,
                repetition: None,
                fold: None,
                seed: None,
                accuracy: None,
                wall_time_seconds: None,
                iterations: None,
                final_grad_norm: None,
                converged: None,
                warning: b.warning.as_deref(),
            };
            if b.records.is_empty() {
                w.serialize(base)?;
                continue;
            }
            for r in &b.records {
                w.serialize(CsvRow {
                    repetition: Some(r.repetition),
                    fold: Some(r.fold),
                    seed: Some(r.seed),
                    accuracy: Some(r.accuracy),
                    wall_time_seconds: Some(r.wall_time_seconds),
                    iterations: Some(r.iterations),
                    final_grad_norm: Some(r.final_grad_norm),
                    converged: Some(r.converged),
                    ..base
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary table: accuracy in percent, time in seconds.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<8} {:<16} {:>12} {:>18} {:>22}\n",
            "solver", "loss", "sigma", "accuracy (%)", "time (s)"
        );
        for b in &self.blocks {
            let sigma = b.sigma.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
            match (&b.summary, &b.warning) {
                (Some(m), _) => {
                    let _ = writeln!(
                        s,
                        "{:<8} {:<16} {:>12} {:>9.2} ± {:<6.2} {:>11.4} ± {:<8.4}",
                        b.solver,
                        b.loss,
                        sigma,
                        100.0 * m.accuracy.mean,
                        100.0 * m.accuracy.std,
                        m.wall_time_seconds.mean,
                        m.wall_time_seconds.std
                    );
                }
                (None, w) => {
                    let _ = writeln!(
                        s,
                        "{:<8} {:<16} skipped: {}",
                        b.solver,
                        b.loss,
                        w.as_deref().unwrap_or("")
                    );
                }
            }
        }
        s
    }
}
