//! Dataset ingestion, feature extraction, partitioning and holdout.

mod csv_export;
mod hapt;
mod hog;
mod holdout;
mod mnist;
mod partition;
mod standardize;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_export::write_csv;
pub use hapt::{hapt_redistribute, load_hapt, HAPT_CLASSES, HAPT_DIM};
pub use hog::{hog_features, hog_transform, HogConfig};
pub use holdout::{holdout, subsample, HoldoutSplit};
pub use mnist::{load_mnist, read_idx_images, read_idx_labels, write_idx, MNIST_SIDE};
pub use partition::{partition, PartitionSpec, Regime};
pub use standardize::Standardizer;
pub use synth::synth_blobs;

/// One labelled pattern. Labels are class indices in `1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// The partition of the data held by one location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDataset {
    pub location_id: usize,
    pub samples: Vec<Sample>,
}

impl LocalDataset {
    pub fn new(location_id: usize, samples: Vec<Sample>) -> Self {
        Self {
            location_id,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Dimensionality of the samples, or `None` for an empty dataset.
    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(Sample::dim)
    }

    /// Per-class sample counts, indexed `0..k` for labels `1..=k`.
    pub fn class_histogram(&self, k: usize) -> Vec<usize> {
        class_histogram(&self.samples, k)
    }
}

pub fn class_histogram(samples: &[Sample], k: usize) -> Vec<usize> {
    let mut hist = vec![0; k];
    for s in samples {
        if (1..=k).contains(&s.label) {
            hist[s.label - 1] += 1;
        }
    }
    hist
}

/// Checks that every sample has dimension `dim` and a label in `1..=k`.
pub fn validate_samples(samples: &[Sample], dim: usize, k: usize) -> Result<()> {
    for s in samples {
        if s.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: s.dim(),
            });
        }
        if !(1..=k).contains(&s.label) {
            return Err(Error::config(format!("label {} outside 1..={k}", s.label)));
        }
    }
    Ok(())
}

/// Number of distinct classes, taken as the largest label present.
pub fn infer_classes(samples: &[Sample]) -> usize {
    samples.iter().map(|s| s.label).max().unwrap_or(0)
}
