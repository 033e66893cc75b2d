use std::sync::Arc;

use super::LinearModel;
use crate::error::{Error, Result};

/// Ordered source hypotheses for one binary task. The order is the global
/// location order and is identical at every location.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceSet {
    pub models: Vec<Arc<LinearModel>>,
}

impl SourceSet {
    pub fn new(models: Vec<Arc<LinearModel>>) -> Result<Self> {
        if let Some(first) = models.first() {
            let d = first.space.raw_dim;
            for m in &models {
                if m.space.sources != 0 || m.space.raw_dim != d {
                    return Err(Error::config(format!(
                        "source model in space {} does not act on raw{d}",
                        m.space
                    )));
                }
            }
        }
        Ok(Self { models })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Margins of every source model on `x`, clamped to `[-clip, clip]` when
/// a clip is given.
pub fn source_features(x: &[f64], sources: &SourceSet, clip: Option<f64>) -> Result<Vec<f64>> {
    sources
        .models
        .iter()
        .map(|m| {
            let v = m.raw_margin(x)?;
            Ok(match clip {
                Some(c) => v.clamp(-c, c),
                None => v,
            })
        })
        .collect()
}
