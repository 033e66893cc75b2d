//! Evaluation indices: precision (overall accuracy), class-averaged recall,
//! their harmonic mean, and the prediction performance gain ρ.
//!
//! "Precision" follows the naming of the original evaluation: it is the
//! fraction of correct predictions over all classes, i.e. accuracy.

mod report;

pub use report::{mean_ci, Interval, MetricRow, MetricsReport, Step};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(predictions: &[usize], truths: &[usize]) -> Result<()> {
    if predictions.len() != truths.len() {
        return Err(Error::Dimension {
            expected: truths.len(),
            got: predictions.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::UndefinedMetric("no predictions to score".into()));
    }
    Ok(())
}

/// Fraction of predictions equal to the truth.
pub fn precision(predictions: &[usize], truths: &[usize]) -> Result<f64> {
    check_lengths(predictions, truths)?;
    let hits = predictions
        .iter()
        .zip(truths)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truths.len() as f64)
}

/// Hit rate of each class `1..=k` among its true members; `None` for
/// classes absent from `truths`.
pub fn per_class_accuracy(
    predictions: &[usize],
    truths: &[usize],
    k: usize,
) -> Result<Vec<Option<f64>>> {
    check_lengths(predictions, truths)?;
    let mut members = vec![0usize; k];
    let mut hits = vec![0usize; k];
    for (&p, &t) in predictions.iter().zip(truths) {
        if !(1..=k).contains(&t) {
            return Err(Error::config(format!("true label {t} outside 1..={k}")));
        }
        members[t - 1] += 1;
        if p == t {
            hits[t - 1] += 1;
        }
    }
    Ok(members
        .iter()
        .zip(&hits)
        .map(|(&m, &h)| (m > 0).then(|| h as f64 / m as f64))
        .collect())
}

/// Mean per-class hit rate over the classes present in `truths`.
pub fn recall(predictions: &[usize], truths: &[usize], k: usize) -> Result<f64> {
    let per_class = per_class_accuracy(predictions, truths, k)?;
    let present: Vec<f64> = per_class.into_iter().flatten().collect();
    if present.is_empty() {
        return Err(Error::UndefinedMetric("no classes present".into()));
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

/// Harmonic mean of `p` and `r`, with `F(0, 0) = 0`.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// `ρ = 1 − (1 − F_step) / (1 − F_base)`; `None` when `F_base = 1`.
pub fn ppg(f_step: f64, f_base: f64) -> Option<f64> {
    (f_base < 1.0).then(|| 1.0 - (1.0 - f_step) / (1.0 - f_base))
}

/// All indices for one prediction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub per_class: Vec<Option<f64>>,
}

impl Scores {
    pub fn compute(predictions: &[usize], truths: &[usize], k: usize) -> Result<Self> {
        let precision = precision(predictions, truths)?;
        let recall = recall(predictions, truths, k)?;
        Ok(Self {
            precision,
            recall,
            f_measure: f_measure(precision, recall),
            per_class: per_class_accuracy(predictions, truths, k)?,
        })
    }
}
