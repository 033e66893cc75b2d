use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decode, sign, CodeBook};
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::learn::{BinaryProblem, FeatureSpace, LinearModel, ModelKind, SourceSet};

/// `k` binary models, one per class, sharing one feature space. Models in
/// an augmented space carry the per-class source sets needed to evaluate
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct OvaClassifier {
    pub models: Vec<Arc<LinearModel>>,
    /// One source set per class, or empty for raw-space models.
    pub sources: Vec<SourceSet>,
    pub clip: Option<f64>,
}

impl OvaClassifier {
    pub fn new(
        models: Vec<Arc<LinearModel>>,
        sources: Vec<SourceSet>,
        clip: Option<f64>,
    ) -> Result<Self> {
        let space = models
            .first()
            .ok_or_else(|| Error::config("a one-vs-all classifier needs at least one model"))?
            .space;
        if let Some(m) = models.iter().find(|m| m.space != space) {
            return Err(Error::config(format!(
                "mixed feature spaces {space} and {}",
                m.space
            )));
        }
        if space.sources > 0 {
            if sources.len() != models.len() {
                return Err(Error::config(format!(
                    "{} transfer models need {} source sets, got {}",
                    models.len(),
                    models.len(),
                    sources.len()
                )));
            }
            for set in &sources {
                if set.len() != space.sources {
                    return Err(Error::Dimension {
                        expected: space.sources,
                        got: set.len(),
                    });
                }
                if set.models.iter().any(|m| m.space.raw_dim != space.raw_dim) {
                    return Err(Error::config(
                        "source set does not match the raw feature space",
                    ));
                }
            }
        }
        Ok(Self {
            models,
            sources,
            clip,
        })
    }

    /// Classifier over raw-space models.
    pub fn raw(models: Vec<LinearModel>) -> Result<Self> {
        Self::new(models.into_iter().map(Arc::new).collect(), Vec::new(), None)
    }

    pub fn classes(&self) -> usize {
        self.models.len()
    }

    pub fn space(&self) -> FeatureSpace {
        self.models[0].space
    }

    /// Margin of the class-`c` model (1-based) on raw input `x`.
    pub fn margin(&self, c: usize, x: &[f64]) -> Result<f64> {
        let m = &self.models[c - 1];
        if m.space.sources == 0 {
            return m.raw_margin(x);
        }
        let feats = crate::learn::source_features(x, &self.sources[c - 1], self.clip)?;
        m.augmented_margin(&feats, x)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let responses = (1..=self.classes())
            .map(|c| self.margin(c, x).map(sign))
            .collect::<Result<Vec<_>>>()?;
        Ok(decode(&responses, &CodeBook::new(self.classes())))
    }

    /// Predictions for every row held by `cache`, reusing cached margins of
    /// raw-space models (in particular shared source models).
    pub fn predict_all(&self, cache: &MarginCache<'_>) -> Result<Vec<usize>> {
        let k = self.classes();
        let per_class: Vec<Vec<f64>> = (0..k)
            .map(|c| self.class_margins(c, cache))
            .collect::<Result<_>>()?;
        let book = CodeBook::new(k);
        Ok((0..cache.len())
            .map(|i| {
                let responses: Vec<f64> = per_class.iter().map(|m| sign(m[i])).collect();
                decode(&responses, &book)
            })
            .collect())
    }

    fn class_margins(&self, c: usize, cache: &MarginCache<'_>) -> Result<Vec<f64>> {
        let m = &self.models[c];
        if m.space.sources == 0 {
            return Ok(cache.margins(m)?.as_ref().clone());
        }
        let mut out: Vec<f64> = cache
            .rows
            .iter()
            .map(|x| m.raw_margin(x))
            .collect::<Result<_>>()?;
        for (beta, src) in m.beta().iter().zip(&self.sources[c].models) {
            if *beta == 0.0 {
                continue;
            }
            let src_m = cache.margins(src)?;
            for (o, v) in out.iter_mut().zip(src_m.iter()) {
                let v = match self.clip {
                    Some(cl) => v.clamp(-cl, cl),
                    None => *v,
                };
                *o += beta * v;
            }
        }
        Ok(out)
    }

    pub fn record(&self) -> OvaRecord {
        OvaRecord {
            labels: (1..=self.classes()).collect(),
            models: self.models.iter().map(|m| m.as_ref().clone()).collect(),
        }
    }
}

/// Serialised form: class-label table plus the ordered model records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvaRecord {
    pub labels: Vec<usize>,
    pub models: Vec<LinearModel>,
}

type CacheEntry = (Arc<LinearModel>, Arc<Vec<f64>>);

/// Raw margins of models over a fixed set of rows, keyed by model identity.
/// Entries hold the model so its address stays valid.
pub struct MarginCache<'a> {
    rows: Vec<&'a [f64]>,
    entries: Mutex<HashMap<usize, CacheEntry>>,
}

impl<'a> MarginCache<'a> {
    pub fn new(samples: &'a [Sample]) -> Self {
        Self::from_rows(samples.iter().map(|s| s.features.as_slice()).collect())
    }

    pub fn from_rows(rows: Vec<&'a [f64]>) -> Self {
        Self {
            rows,
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn margins(&self, model: &Arc<LinearModel>) -> Result<Arc<Vec<f64>>> {
        let key = Arc::as_ptr(model) as usize;
        if let Some((_, m)) = self.entries.lock().expect("cache lock").get(&key) {
            return Ok(m.clone());
        }
        let computed: Vec<f64> = self
            .rows
            .iter()
            .map(|x| model.raw_margin(x))
            .collect::<Result<_>>()?;
        let computed = Arc::new(computed);
        self.entries
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| (model.clone(), computed.clone()));
        Ok(computed)
    }
}

/// Trains one binary model per class `1..=k` (class `c` positive, the rest
/// negative) with `trainer`. Classes are trained concurrently.
pub fn train_ova<F>(samples: &[Sample], k: usize, trainer: F) -> Result<OvaClassifier>
where
    F: Fn(&BinaryProblem<'_>, usize) -> Result<LinearModel> + Sync,
{
    if k < 2 {
        return Err(Error::config("one-vs-all needs at least two classes"));
    }
    if samples.is_empty() {
        return Err(Error::config("cannot train one-vs-all on an empty dataset"));
    }
    let models = (1..=k)
        .into_par_iter()
        .map(|c| trainer(&BinaryProblem::one_vs_rest(samples, c), c))
        .collect::<Result<Vec<_>>>()?;
    OvaClassifier::raw(models)
}

/// Coefficient-wise mean of models sharing one feature space.
pub fn consensus_mean(models: &[&LinearModel]) -> Result<LinearModel> {
    let first = models
        .first()
        .ok_or_else(|| Error::config("consensus mean of no models"))?;
    let space = first.space;
    let mut acc = vec![0.0; space.len()];
    for m in models {
        if m.space != space {
            return Err(Error::config(format!(
                "mixed feature spaces {space} and {}",
                m.space
            )));
        }
        acc.iter_mut()
            .zip(&m.coefficients)
            .for_each(|(a, v)| *a += v);
    }
    let n = models.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    LinearModel::new(space, ModelKind::Aggregate, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_blobs;
    use crate::learn::{train_svm, SvmConfig};

    fn raw(coef: Vec<f64>) -> LinearModel {
        LinearModel::new(FeatureSpace::raw(coef.len() - 1), ModelKind::Base, coef).unwrap()
    }

    #[test]
    fn mean_examples() {
        let a = raw(vec![1.0, 2.0]);
        let b = raw(vec![3.0, 4.0]);
        assert_eq!(
            consensus_mean(&[&a, &b]).unwrap().coefficients,
            vec![2.0, 3.0]
        );
        assert_eq!(consensus_mean(&[&a]).unwrap().coefficients, a.coefficients);
        assert_eq!(
            consensus_mean(&[&b, &b, &b]).unwrap().coefficients,
            b.coefficients
        );
        let c = raw(vec![1.0, 2.0, 3.0]);
        assert!(consensus_mean(&[&a, &c]).is_err());
        assert_eq!(
            consensus_mean(&[&a, &b]).unwrap(),
            consensus_mean(&[&b, &a]).unwrap()
        );
    }

    #[test]
    fn two_class_models_agree_up_to_sign() {
        let data = synth_blobs(2, 4, 50, 4.0, 11).unwrap();
        let test = synth_blobs(2, 4, 20, 4.0, 12).unwrap();
        let clf = train_ova(&data, 2, |p, _| train_svm(p, &SvmConfig::default())).unwrap();
        let disagree = test
            .iter()
            .filter(|s| {
                sign(clf.margin(1, &s.features).unwrap())
                    == sign(clf.margin(2, &s.features).unwrap())
            })
            .count();
        assert!(
            disagree <= 1,
            "{disagree} of {} held-out points",
            test.len()
        );
    }

    #[test]
    fn missing_class_gives_negative_constant() {
        let data: Vec<Sample> = synth_blobs(3, 3, 10, 3.0, 1)
            .unwrap()
            .into_iter()
            .filter(|s| s.label != 3)
            .collect();
        let clf = train_ova(&data, 3, |p, _| train_svm(p, &SvmConfig::default())).unwrap();
        assert_eq!(clf.classes(), 3);
        assert!(clf.models[2].degenerate);
        assert_eq!(clf.models[2].intercept(), -1.0);
    }

    #[test]
    fn all_negative_margins_decode_to_first_class() {
        let m = Arc::new(raw(vec![0.0, -1.0]));
        let clf = OvaClassifier::new(vec![m.clone(), m.clone(), m], Vec::new(), None).unwrap();
        assert_eq!(clf.predict(&[5.0]).unwrap(), 1);
    }

    #[test]
    fn zero_margin_counts_as_positive() {
        let zero = Arc::new(raw(vec![0.0, 0.0]));
        let neg = Arc::new(raw(vec![0.0, -1.0]));
        let clf = OvaClassifier::new(vec![neg, zero], Vec::new(), None).unwrap();
        assert_eq!(clf.predict(&[1.0]).unwrap(), 2);
    }

    #[test]
    fn scaling_margins_keeps_labels_and_cache_matches() {
        let data = synth_blobs(4, 6, 30, 5.0, 3).unwrap();
        let clf = train_ova(&data, 4, |p, _| train_svm(p, &SvmConfig::default())).unwrap();
        let scaled = OvaClassifier::raw(
            clf.models
                .iter()
                .map(|m| {
                    let mut m = m.as_ref().clone();
                    m.coefficients.iter_mut().for_each(|v| *v *= 3.5);
                    m
                })
                .collect(),
        )
        .unwrap();
        let cache = MarginCache::new(&data);
        let a = clf.predict_all(&cache).unwrap();
        assert_eq!(a, scaled.predict_all(&cache).unwrap());
        let direct: Vec<usize> = data
            .iter()
            .map(|s| clf.predict(&s.features).unwrap())
            .collect();
        assert_eq!(a, direct);
        let correct = a.iter().zip(&data).filter(|(p, s)| **p == s.label).count();
        assert!(correct as f64 / data.len() as f64 > 0.8);
    }

    #[test]
    fn transfer_models_use_sources() {
        let src = Arc::new(raw(vec![2.0, 0.0]));
        let set = SourceSet::new(vec![src]).unwrap();
        // β = 1 on a source clipped to ±1, ω = 0, b = -0.5
        let gtl = Arc::new(
            LinearModel::new(
                FeatureSpace::augmented(1, 1),
                ModelKind::Gtl,
                vec![1.0, 0.0, -0.5],
            )
            .unwrap(),
        );
        let neg = Arc::new(
            LinearModel::new(
                FeatureSpace::augmented(1, 1),
                ModelKind::Gtl,
                vec![0.0, 0.0, -1.0],
            )
            .unwrap(),
        );
        let clf = OvaClassifier::new(vec![neg, gtl], vec![set.clone(), set], Some(1.0)).unwrap();
        assert!((clf.margin(2, &[3.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((clf.margin(2, &[-3.0]).unwrap() + 1.5).abs() < 1e-15);
        let rows = [Sample::new(vec![3.0], 2), Sample::new(vec![-3.0], 1)];
        let cache = MarginCache::new(&rows);
        assert_eq!(clf.predict_all(&cache).unwrap(), vec![2, 1]);
        assert!(OvaClassifier::new(clf.models.clone(), Vec::new(), None).is_err());
    }

    #[test]
    fn record_serialises() {
        let clf = OvaClassifier::raw(vec![raw(vec![1.0, 0.0]), raw(vec![-1.0, 0.0])]).unwrap();
        let json = serde_json::to_string(&clf.record()).unwrap();
        let back: OvaRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.labels, vec![1, 2]);
        assert_eq!(back, clf.record());
    }
}
