use crate::data::{
    hapt_redistribute, hog_transform, holdout, infer_classes, load_hapt, load_mnist, partition,
    subsample, synth_blobs, LocalDataset, PartitionSpec, Sample, HAPT_CLASSES,
};
use crate::error::{Error, Result};

use super::config::{DatasetConfig, DatasetKind};

/// A loaded pool, shared by every run of an experiment.
#[derive(Debug, Clone)]
pub enum Pool {
    Plain {
        samples: Vec<Sample>,
        k: usize,
    },
    /// Samples tagged with the user that produced them.
    Users {
        samples: Vec<(usize, Sample)>,
        k: usize,
    },
}

impl Pool {
    pub fn classes(&self) -> usize {
        match self {
            Pool::Plain { k, .. } | Pool::Users { k, .. } => *k,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Pool::Plain { samples, .. } => samples.len(),
            Pool::Users { samples, .. } => samples.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Pool::Plain { samples, .. } => samples.first().map_or(0, |s| s.dim()),
            Pool::Users { samples, .. } => samples.first().map_or(0, |(_, s)| s.dim()),
        }
    }
}

/// Loads (or generates) the pool. The subsample and the synthetic draw use
/// `seed`, so every run of an experiment sees the same pool.
pub fn load_pool(config: &DatasetConfig, seed: u64) -> Result<Pool> {
    config.validate()?;
    let path = || config.path.as_deref().expect("validated");
    let pool = match config.kind {
        DatasetKind::Synth => {
            let s = &config.synth;
            let samples = synth_blobs(s.classes, s.dim, s.per_class, s.separation, seed)?;
            let samples = match config.subsample {
                Some(n) => subsample(&samples, n, seed),
                None => samples,
            };
            Pool::Plain {
                samples,
                k: s.classes,
            }
        }
        DatasetKind::Mnist => {
            let images = load_mnist(path())?;
            let images = match config.subsample {
                Some(n) => subsample(&images, n, seed),
                None => images,
            };
            log::info!("computing HOG features for {} images", images.len());
            let samples = hog_transform(&images, &config.hog)?;
            let k = infer_classes(&samples);
            Pool::Plain { samples, k }
        }
        DatasetKind::Hapt => {
            let tagged = load_hapt(path())?;
            let samples = match config.subsample {
                Some(n) => subsample(&tagged, n, seed),
                None => tagged,
            };
            Pool::Users {
                samples,
                k: HAPT_CLASSES,
            }
        }
    };
    if pool.is_empty() {
        return Err(Error::config("dataset is empty"));
    }
    Ok(pool)
}

/// One run's view of the data.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Vec<LocalDataset>,
    pub test: Vec<Sample>,
    pub k: usize,
    pub dim: usize,
}

impl Prepared {
    pub fn train_size(&self) -> usize {
        self.train.iter().map(|l| l.len()).sum()
    }
}

/// Holds out the global test set, then splits the rest across locations.
pub fn prepare(pool: &Pool, spec: &PartitionSpec, ratio: f64, seed: u64) -> Result<Prepared> {
    let k = pool.classes();
    let (train, test) = match pool {
        Pool::Plain { samples, .. } => {
            let split = holdout(samples, ratio, seed)?;
            let spec = PartitionSpec {
                seed,
                ..spec.clone()
            };
            (partition(&split.train, &spec)?, split.test)
        }
        Pool::Users { samples, .. } => {
            let split = holdout(samples, ratio, seed)?;
            let test = split.test.into_iter().map(|(_, s)| s).collect();
            (hapt_redistribute(&split.train, seed)?, test)
        }
    };
    if test.is_empty() {
        return Err(Error::config("holdout left no test samples"));
    }
    Ok(Prepared {
        train,
        test,
        k,
        dim: pool.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Regime;

    #[test]
    fn synthetic_runs_differ_but_repeat() {
        let cfg = DatasetConfig::default();
        let pool = load_pool(&cfg, 1).unwrap();
        let spec = PartitionSpec {
            regime: Regime::Balanced,
            num_locations: 3,
            ..PartitionSpec::default()
        };
        let a = prepare(&pool, &spec, 0.3, 10).unwrap();
        let b = prepare(&pool, &spec, 0.3, 10).unwrap();
        let c = prepare(&pool, &spec, 0.3, 11).unwrap();
        assert_eq!(a.test, b.test);
        assert_ne!(a.test, c.test);
        assert_eq!(a.train.len(), 3);
        assert_eq!(a.train_size() + a.test.len(), pool.len());
        assert_eq!(a.test.len(), (0.3 * pool.len() as f64).round() as usize);
    }
}
