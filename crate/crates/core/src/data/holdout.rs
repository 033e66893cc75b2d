use rand::seq::SliceRandom;

use super::Sample;
use crate::error::{Error, Result};
use crate::rng::{rng_for, tag};

/// A seeded train/test split. `test` never reaches any training routine.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutSplit<T = Sample> {
    pub train: Vec<T>,
    pub test: Vec<T>,
    pub ratio: f64,
}

/// Uniform random split reserving `round(ratio * N)` items for testing.
/// Both halves keep the relative order of `pool`.
pub fn holdout<T: Clone>(pool: &[T], ratio: f64, seed: u64) -> Result<HoldoutSplit<T>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::config(format!(
            "holdout ratio {ratio} outside (0, 1)"
        )));
    }
    let n_test = (ratio * pool.len() as f64).round() as usize;
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut rng_for(seed, &[tag::HOLDOUT]));
    let mut is_test = vec![false; pool.len()];
    idx[..n_test].iter().for_each(|&i| is_test[i] = true);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (item, t) in pool.iter().zip(is_test) {
        if t {
            test.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    Ok(HoldoutSplit { train, test, ratio })
}

/// Keeps `n` items chosen uniformly at random, in their original order.
pub fn subsample<T: Clone>(pool: &[T], n: usize, seed: u64) -> Vec<T> {
    if n >= pool.len() {
        return pool.to_vec();
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut rng_for(seed, &[tag::SUBSAMPLE]));
    let mut keep = idx[..n].to_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| pool[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventy_thirty() {
        let pool: Vec<usize> = (0..100).collect();
        let split = holdout(&pool, 0.3, 5).unwrap();
        assert_eq!(split.train.len(), 70);
        assert_eq!(split.test.len(), 30);
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, pool);
    }

    #[test]
    fn mnist_sized_test_set() {
        let pool = vec![(); 70000];
        assert_eq!(holdout(&pool, 0.3, 1).unwrap().test.len(), 21000);
    }

    #[test]
    fn deterministic_per_seed() {
        let pool: Vec<usize> = (0..50).collect();
        assert_eq!(
            holdout(&pool, 0.3, 9).unwrap(),
            holdout(&pool, 0.3, 9).unwrap()
        );
        assert_ne!(
            holdout(&pool, 0.3, 9).unwrap().test,
            holdout(&pool, 0.3, 10).unwrap().test
        );
    }

    #[test]
    fn ratio_bounds() {
        let pool = [1, 2, 3];
        for r in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(holdout(&pool, r, 0), Err(Error::Config(_))));
        }
    }

    #[test]
    fn subsample_size() {
        let pool: Vec<usize> = (0..20).collect();
        let s = subsample(&pool, 5, 3);
        assert_eq!(s.len(), 5);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(subsample(&pool, 50, 3), pool);
    }
}
