use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepAxis};
use super::dataset::load_pool;
use super::runner::{run_with_pool, write_file, ExperimentReport};
use super::tables::report_tables;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: ExperimentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

/// One sub-experiment per axis value, over a single loaded pool.
pub fn sweep(config: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::config(format!(
            "sweep over {} has no values",
            axis.as_str()
        )));
    }
    let configs = values
        .iter()
        .map(|&v| {
            let c = config.with_axis(axis, v)?;
            c.validate()?;
            Ok((v, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let pool = load_pool(&config.dataset, config.base_seed)?;
    let points = configs
        .into_iter()
        .map(|(value, c)| {
            log::info!("sweep {} = {value}", axis.as_str());
            Ok(SweepPoint {
                value,
                report: run_with_pool(&c, &pool)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport { axis, points })
}

fn prefixed(axis: SweepAxis, points: &[(f64, String)]) -> String {
    let mut out = String::new();
    for (i, (value, csv)) in points.iter().enumerate() {
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or_default();
        if i == 0 {
            let _ = writeln!(out, "axis,value,{header}");
        }
        for line in lines {
            let _ = writeln!(out, "{},{value},{line}", axis.as_str());
        }
    }
    out
}

impl SweepReport {
    /// Long CSV of every metric row, led by the axis name and value.
    pub fn metrics_csv(&self) -> Result<String> {
        let parts = self
            .points
            .iter()
            .map(|p| {
                let mut buf = Vec::new();
                p.report
                    .metrics
                    .write_csv(&mut buf)
                    .map_err(|e| Error::io("<memory>", e))?;
                Ok((p.value, String::from_utf8(buf).expect("csv is utf-8")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(prefixed(self.axis, &parts))
    }

    /// Per-step summaries (the curve along the axis).
    pub fn steps_csv(&self) -> String {
        let parts: Vec<_> = self
            .points
            .iter()
            .map(|p| (p.value, report_tables(&p.report).steps_csv()))
            .collect();
        prefixed(self.axis, &parts)
    }

    pub fn overhead_csv(&self) -> String {
        let parts: Vec<_> = self
            .points
            .iter()
            .map(|p| (p.value, report_tables(&p.report).overhead_csv()))
            .collect();
        prefixed(self.axis, &parts)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            (dir.join("sweep_metrics.csv"), self.metrics_csv()?),
            (dir.join("sweep_steps.csv"), self.steps_csv()),
            (dir.join("sweep_overhead.csv"), self.overhead_csv()),
            (dir.join("sweep.json"), serde_json::to_string_pretty(self)?),
        ];
        for (path, text) in &files {
            write_file(path, text.as_bytes())?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}
