use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::runner::{write_file, ExperimentReport};
use crate::error::Result;
use crate::metrics::Step;
use crate::netsim::formulas::{gain, MIB};

/// One overhead comparison line, averaged over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadRow {
    pub scenario: String,
    pub procedure: String,
    pub phase: Option<usize>,
    pub runs: usize,
    /// Mean metered non-null coefficients.
    pub coefficients: f64,
    pub empirical_mib: f64,
    /// Formula at the measured payload sizes; absent when some traffic of
    /// the procedure has no closed form.
    pub formula_mib: Option<f64>,
    pub bound_mib: Option<f64>,
    pub cloud_mib: f64,
    /// Saving against uploading the extracted features.
    pub gain_features: f64,
    /// Saving against uploading the raw records.
    pub gain_raw: Option<f64>,
}

/// Mean of one metric for one step, with its 95% half width over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub scenario: String,
    pub step: Step,
    pub metric: String,
    pub mean: f64,
    pub half_width: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub overhead: Vec<OverheadRow>,
    pub steps: Vec<StepRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Overhead comparisons and per-step metric summaries of a report.
pub fn report_tables(report: &ExperimentReport) -> Tables {
    let bpc = report.config.encoding.bytes_per_coeff as f64;
    let mut groups: BTreeMap<(String, String, Option<usize>), Vec<_>> = BTreeMap::new();
    for r in &report.overhead {
        groups
            .entry((r.scenario.clone(), r.procedure.clone(), r.phase))
            .or_default()
            .push(r);
    }
    let overhead = groups
        .into_iter()
        .map(|((scenario, procedure, phase), recs)| {
            let formula = recs
                .iter()
                .map(|r| {
                    r.reconciliation
                        .rows
                        .iter()
                        .map(|row| row.predicted)
                        .sum::<Option<f64>>()
                })
                .collect::<Option<Vec<f64>>>();
            let bounds = recs
                .iter()
                .map(|r| r.reconciliation.bound)
                .collect::<Option<Vec<f64>>>();
            let raw = recs
                .iter()
                .map(|r| r.raw_reference.map(|raw| gain(r.count as f64, raw)))
                .collect::<Option<Vec<f64>>>();
            OverheadRow {
                scenario,
                procedure,
                phase,
                runs: recs.len(),
                coefficients: mean(recs.iter().map(|r| r.count as f64)),
                empirical_mib: mean(recs.iter().map(|r| r.bytes as f64 / MIB)),
                formula_mib: formula.map(|f| mean(f.into_iter()) * bpc / MIB),
                bound_mib: bounds.map(|b| mean(b.into_iter()) * bpc / MIB),
                cloud_mib: mean(recs.iter().map(|r| r.cloud_reference)) * bpc / MIB,
                gain_features: mean(recs.iter().map(|r| gain(r.count as f64, r.cloud_reference))),
                gain_raw: raw.map(|g| mean(g.into_iter())),
            }
        })
        .collect();
    let steps = report
        .metrics
        .summary()
        .into_iter()
        .map(|((scenario, step, metric), i)| StepRow {
            scenario,
            step,
            metric,
            mean: i.mean,
            half_width: i.half_width,
            runs: i.n,
        })
        .collect();
    Tables { overhead, steps }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format!("{v:.digits$}"))
        .unwrap_or_else(|| "NA".into())
}

impl Tables {
    pub fn is_empty(&self) -> bool {
        self.overhead.is_empty() && self.steps.is_empty()
    }

    pub fn overhead_csv(&self) -> String {
        let mut out = String::from(
            "scenario,procedure,phase,runs,coefficients,empirical_mib,formula_mib,bound_mib,cloud_mib,gain_features,gain_raw\n",
        );
        for r in &self.overhead {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.scenario,
                r.procedure,
                r.phase.map(|p| p.to_string()).unwrap_or_default(),
                r.runs,
                r.coefficients,
                r.empirical_mib,
                r.formula_mib
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "NA".into()),
                r.bound_mib
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "NA".into()),
                r.cloud_mib,
                r.gain_features,
                r.gain_raw
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "NA".into()),
            );
        }
        out
    }

    pub fn steps_csv(&self) -> String {
        let mut out = String::from("scenario,step,metric,mean,half_width,runs\n");
        for r in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.scenario,
                r.step,
                r.metric,
                r.mean,
                r.half_width
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "NA".into()),
                r.runs
            );
        }
        out
    }

    /// Human-readable tables in Markdown.
    pub fn markdown(&self) -> String {
        let mut out = String::new();
        if !self.overhead.is_empty() {
            out.push_str("## Overhead\n\n");
            out.push_str("| scenario | procedure | phase | empirical MB | formula MB | bound MB | cloud MB | gain (features) | gain (raw) |\n");
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for r in &self.overhead {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.3} | {} | {} | {:.3} | {:.1}% | {} |",
                    r.scenario,
                    r.procedure,
                    r.phase.map(|p| p.to_string()).unwrap_or_default(),
                    r.empirical_mib,
                    opt(r.formula_mib, 3),
                    opt(r.bound_mib, 3),
                    r.cloud_mib,
                    100.0 * r.gain_features,
                    r.gain_raw
                        .map(|g| format!("{:.1}%", 100.0 * g))
                        .unwrap_or_else(|| "NA".into()),
                );
            }
            out.push('\n');
        }
        let f_rows: Vec<_> = self
            .steps
            .iter()
            .filter(|r| r.metric == "f_measure" || r.metric == "ppg")
            .collect();
        if !f_rows.is_empty() {
            out.push_str("## Prediction quality\n\n| scenario | step | metric | mean | ±95% | runs |\n|---|---|---|---|---|---|\n");
            for r in f_rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.4} | {} | {} |",
                    r.scenario,
                    r.step,
                    r.metric,
                    r.mean,
                    opt(r.half_width, 4),
                    r.runs
                );
            }
        }
        out
    }

    /// Writes `tables.md`, `overhead_table.csv` and `steps.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let files = [
            (dir.join("tables.md"), self.markdown()),
            (dir.join("overhead_table.csv"), self.overhead_csv()),
            (dir.join("steps.csv"), self.steps_csv()),
        ];
        for (path, text) in &files {
            write_file(path, text.as_bytes())?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}
