use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::Scores;
use crate::error::Result;

/// Which model produced a set of predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// Local one-vs-all SVM, before any exchange.
    Local,
    /// Local GreedyTL model after the first exchange.
    GtlStep2,
    /// Mean of all GreedyTL models.
    GtlMean,
    /// Majority vote over all GreedyTL models.
    GtlVote,
    NohtlMu,
    NohtlMv,
    Cloud,
    GtlLimited,
    DynGtl,
    DynNohtl,
}

impl Step {
    pub fn as_str(self) -> &'static str {
        match self {
            Step::Local => "local",
            Step::GtlStep2 => "gtl_step2",
            Step::GtlMean => "gtl_mean",
            Step::GtlVote => "gtl_vote",
            Step::NohtlMu => "nohtl_mu",
            Step::NohtlMv => "nohtl_mv",
            Step::Cloud => "cloud",
            Step::GtlLimited => "gtl_limited",
            Step::DynGtl => "dyn_gtl",
            Step::DynNohtl => "dyn_nohtl",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One long-format cell. `None` fields are written as empty CSV cells; a
/// `None` value means "not applicable".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run: usize,
    pub scenario: String,
    pub location: Option<usize>,
    pub phase: Option<usize>,
    pub step: Step,
    pub class: Option<usize>,
    pub metric: String,
    pub value: Option<f64>,
}

/// Mean with a 95% Student-t half width (absent for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub half_width: Option<f64>,
    pub n: usize,
}

pub fn mean_ci(values: &[f64]) -> Option<Interval> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let half_width = (n > 1).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        t * (var / n as f64).sqrt()
    });
    Some(Interval {
        mean,
        half_width,
        n,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<MetricRow>,
}

impl MetricsReport {
    /// Appends precision, recall, F, per-class accuracy and (when a base F
    /// is given) the gain ρ for one evaluation.
    #[allow(clippy::too_many_arguments)]
    pub fn push_scores(
        &mut self,
        run: usize,
        scenario: &str,
        location: Option<usize>,
        phase: Option<usize>,
        step: Step,
        scores: &Scores,
        base_f: Option<f64>,
    ) {
        let row = |class: Option<usize>, metric: &str, value: Option<f64>| MetricRow {
            run,
            scenario: scenario.to_string(),
            location,
            phase,
            step,
            class,
            metric: metric.to_string(),
            value,
        };
        self.rows
            .push(row(None, "precision", Some(scores.precision)));
        self.rows.push(row(None, "recall", Some(scores.recall)));
        self.rows
            .push(row(None, "f_measure", Some(scores.f_measure)));
        if let Some(base) = base_f {
            self.rows
                .push(row(None, "ppg", super::ppg(scores.f_measure, base)));
        }
        for (c, acc) in scores.per_class.iter().enumerate() {
            self.rows.push(row(Some(c + 1), "class_accuracy", *acc));
        }
    }

    pub fn extend(&mut self, other: MetricsReport) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "run,scenario,location,phase,step,class,metric,value")?;
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.run,
                r.scenario,
                opt(r.location),
                opt(r.phase),
                r.step,
                opt(r.class),
                r.metric,
                r.value
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "NA".into())
            )?;
        }
        Ok(())
    }

    /// Values of `metric` for `step` (whole-run rows, any location).
    pub fn values(&self, scenario: &str, step: Step, metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| {
                r.scenario == scenario && r.step == step && r.metric == metric && r.class.is_none()
            })
            .filter_map(|r| r.value)
            .collect()
    }

    /// Mean of `metric` over locations within each run, then averaged over
    /// runs with a 95% interval. Keyed by `(scenario, step, metric)`; the
    /// last phase is used for phased steps.
    pub fn summary(&self) -> BTreeMap<(String, Step, String), Interval> {
        let mut last_phase: BTreeMap<(String, Step), usize> = BTreeMap::new();
        for r in &self.rows {
            if let Some(p) = r.phase {
                let e = last_phase.entry((r.scenario.clone(), r.step)).or_insert(p);
                *e = (*e).max(p);
            }
        }
        let mut per_run: BTreeMap<(String, Step, String), BTreeMap<usize, Vec<f64>>> =
            BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.class.is_none()) {
            if r.phase.is_some()
                && r.phase != last_phase.get(&(r.scenario.clone(), r.step)).copied()
            {
                continue;
            }
            if let Some(v) = r.value {
                per_run
                    .entry((r.scenario.clone(), r.step, r.metric.clone()))
                    .or_default()
                    .entry(r.run)
                    .or_default()
                    .push(v);
            }
        }
        per_run
            .into_iter()
            .filter_map(|(key, runs)| {
                let means: Vec<f64> = runs
                    .values()
                    .map(|v| v.iter().sum::<f64>() / v.len() as f64)
                    .collect();
                mean_ci(&means).map(|i| (key, i))
            })
            .collect()
    }

    /// JSON summary: one object per `(scenario, step, metric)`.
    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Entry<'a> {
            scenario: &'a str,
            step: Step,
            metric: &'a str,
            #[serde(flatten)]
            interval: Interval,
        }
        let summary = self.summary();
        let entries: Vec<Entry<'_>> = summary
            .iter()
            .map(|((scenario, step, metric), interval)| Entry {
                scenario,
                step: *step,
                metric,
                interval: *interval,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&entries)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_matches_t_table() {
        // t(0.975, 9) = 2.262157; sd of 1..=10 is sqrt(55/6)
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let i = mean_ci(&v).unwrap();
        assert_eq!(i.mean, 5.5);
        let expected = 2.262157 * (55.0f64 / 6.0).sqrt() / 10f64.sqrt();
        assert!((i.half_width.unwrap() - expected).abs() < 1e-5);
        assert_eq!(mean_ci(&[3.0]).unwrap().half_width, None);
        assert!(mean_ci(&[]).is_none());
    }

    #[test]
    fn csv_and_summary() {
        let mut rep = MetricsReport::default();
        let s = Scores::compute(&[1, 2, 2], &[1, 2, 1], 2).unwrap();
        rep.push_scores(0, "clean", Some(0), None, Step::Local, &s, None);
        rep.push_scores(0, "clean", Some(0), None, Step::GtlMean, &s, Some(1.0));
        rep.push_scores(1, "clean", Some(0), None, Step::GtlMean, &s, Some(0.5));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("run,scenario,location,phase,step,class,metric,value\n"));
        assert!(text.contains("0,clean,0,,gtl_mean,,ppg,NA\n"));
        let sum = rep.summary();
        let f = sum[&("clean".to_string(), Step::GtlMean, "f_measure".to_string())];
        assert_eq!(f.n, 2);
        assert!((f.mean - s.f_measure).abs() < 1e-15);
        assert!(rep.summary_json().unwrap().contains("\"gtl_mean\""));
    }

    #[test]
    fn empty_report() {
        let rep = MetricsReport::default();
        assert!(rep.summary().is_empty());
        assert_eq!(rep.summary_json().unwrap(), "[]");
    }
}
