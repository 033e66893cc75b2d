//! Splitting a training pool across locations under the three class
//! distribution regimes.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{infer_classes, LocalDataset, Sample};
use crate::error::{Error, Result};
use crate::rng::{rng_for, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Balanced,
    ClassUnbalance,
    NodeUnbalance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionSpec {
    pub regime: Regime,
    pub num_locations: usize,
    /// Share of a location's samples drawn from its dominant class.
    pub dominant_fraction: f64,
    /// Depleted classes (1-based) for `class_unbalance`.
    pub underrepresented_classes: Vec<usize>,
    /// Fraction of each depleted class that is kept.
    pub depletion_keep: f64,
    pub seed: u64,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        Self {
            regime: Regime::Balanced,
            num_locations: 10,
            dominant_fraction: 0.7,
            // digits 2, 5, 6, 7, 8
            underrepresented_classes: vec![3, 6, 7, 8, 9],
            depletion_keep: 0.1,
            seed: 0,
        }
    }
}

impl PartitionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_locations == 0 {
            return Err(Error::config("num_locations must be positive"));
        }
        if !(self.dominant_fraction > 0.0 && self.dominant_fraction <= 1.0) {
            return Err(Error::config("dominant_fraction must lie in (0, 1]"));
        }
        if !(self.depletion_keep > 0.0 && self.depletion_keep <= 1.0) {
            return Err(Error::config("depletion_keep must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn by_class(pool: &[Sample], k: usize, seed: u64) -> Vec<Vec<Sample>> {
    let mut classes = vec![Vec::new(); k];
    for s in pool {
        classes[s.label - 1].push(s.clone());
    }
    for (c, members) in classes.iter_mut().enumerate() {
        members.shuffle(&mut rng_for(seed, &[tag::PARTITION, c as u64]));
    }
    classes
}

// Round-robin dealing with a running cursor: per-location class counts and
// location sizes both differ by at most one.
fn deal(classes: Vec<Vec<Sample>>, s: usize) -> Vec<LocalDataset> {
    let mut locs: Vec<LocalDataset> = (0..s).map(|l| LocalDataset::new(l, Vec::new())).collect();
    let mut cursor = 0;
    for members in classes {
        for sample in members {
            locs[cursor % s].samples.push(sample);
            cursor += 1;
        }
    }
    locs
}

/// Largest-remainder apportionment of `total` items by `shares` (sum 1).
/// Equal remainders go to the entry with the smaller `load`, so repeated
/// calls spread rounding surplus across entries.
fn apportion(total: usize, shares: &[f64], load: &[usize]) -> Vec<usize> {
    let quotas: Vec<f64> = shares.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        // Remainders are compared on a 1e-9 grid so float noise does not
        // defeat the load tie-break.
        let rem = |i: usize| ((quotas[i] - quotas[i].floor()) * 1e9).round() as u64;
        rem(b)
            .cmp(&rem(a))
            .then(load[a].cmp(&load[b]))
            .then(a.cmp(&b))
    });
    for i in order {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Splits `pool` into `spec.num_locations` disjoint local datasets.
///
/// * `Balanced`: every location receives each class in equal measure (±1).
/// * `ClassUnbalance`: the listed classes are first thinned to
///   `depletion_keep` of their size, then the pool is dealt as balanced, so
///   every location sees the same skew. The discarded samples are not part
///   of any location.
/// * `NodeUnbalance`: location `l` is dominated by class `l mod k`, which
///   makes up `dominant_fraction` of its samples (exactly, up to rounding,
///   when the pool is class-balanced and `k` divides `s`); the remaining
///   classes are spread evenly. Every sample of the pool is assigned.
pub fn partition(pool: &[Sample], spec: &PartitionSpec) -> Result<Vec<LocalDataset>> {
    spec.validate()?;
    if pool.is_empty() {
        return Err(Error::config("cannot partition an empty pool"));
    }
    let s = spec.num_locations;
    let k = infer_classes(pool);
    if s == 1 && spec.regime == Regime::Balanced {
        return Ok(vec![LocalDataset::new(0, pool.to_vec())]);
    }
    let mut classes = by_class(pool, k, spec.seed);
    match spec.regime {
        Regime::Balanced => Ok(deal(classes, s)),
        Regime::ClassUnbalance => {
            for &c in &spec.underrepresented_classes {
                if !(1..=k).contains(&c) {
                    return Err(Error::config(format!("depleted class {c} outside 1..={k}")));
                }
                let members = &mut classes[c - 1];
                let keep = ((members.len() as f64) * spec.depletion_keep).round() as usize;
                if keep == 0 {
                    return Err(Error::config(format!(
                        "class {c} has {} samples; depletion leaves none",
                        members.len()
                    )));
                }
                members.truncate(keep);
            }
            Ok(deal(classes, s))
        }
        Regime::NodeUnbalance => {
            if k < 2 {
                return Err(Error::config("node unbalance needs at least 2 classes"));
            }
            let f = spec.dominant_fraction;
            let mut locs: Vec<LocalDataset> =
                (0..s).map(|l| LocalDataset::new(l, Vec::new())).collect();
            // Rounding extras handed out so far, per location.
            let mut surplus = vec![0usize; s];
            for (c, members) in classes.into_iter().enumerate() {
                if members.is_empty() {
                    return Err(Error::config(format!("class {} has no samples", c + 1)));
                }
                let dominant: Vec<bool> = (0..s).map(|l| l % k == c).collect();
                let r = dominant.iter().filter(|&&d| d).count() as f64;
                let shares: Vec<f64> = if f >= 1.0 {
                    if r == 0.0 {
                        return Err(Error::config(format!(
                            "class {} is dominant nowhere and dominant_fraction is 1",
                            c + 1
                        )));
                    }
                    dominant
                        .iter()
                        .map(|&d| if d { 1.0 / r } else { 0.0 })
                        .collect()
                } else {
                    let rho = f * (k - 1) as f64 / (1.0 - f);
                    let b = 1.0 / (r * rho + (s as f64 - r));
                    dominant
                        .iter()
                        .map(|&d| if d { rho * b } else { b })
                        .collect()
                };
                let counts = apportion(members.len(), &shares, &surplus);
                for (l, (&n, w)) in counts.iter().zip(&shares).enumerate() {
                    surplus[l] += n - (w * members.len() as f64).floor() as usize;
                }
                let mut it = members.into_iter();
                for (loc, n) in locs.iter_mut().zip(counts) {
                    loc.samples.extend(it.by_ref().take(n));
                }
            }
            Ok(locs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(k: usize, per_class: usize) -> Vec<Sample> {
        (0..k * per_class)
            .map(|i| Sample::new(vec![i as f64], i % k + 1))
            .collect()
    }

    fn ids(locs: &[LocalDataset]) -> Vec<u64> {
        let mut v: Vec<u64> = locs
            .iter()
            .flat_map(|l| l.samples.iter().map(|s| s.features[0] as u64))
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn balanced_histograms_within_one() {
        let p = pool(4, 37);
        let spec = PartitionSpec {
            num_locations: 5,
            seed: 3,
            ..Default::default()
        };
        let locs = partition(&p, &spec).unwrap();
        assert_eq!(ids(&locs), (0..148).collect::<Vec<u64>>());
        for c in 0..4 {
            let counts: Vec<usize> = locs.iter().map(|l| l.class_histogram(4)[c]).collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "{counts:?}");
        }
    }

    #[test]
    fn single_location_is_pool() {
        let p = pool(3, 4);
        let spec = PartitionSpec {
            num_locations: 1,
            ..Default::default()
        };
        assert_eq!(partition(&p, &spec).unwrap()[0].samples, p);
    }

    #[test]
    fn node_unbalance_rotation_and_share() {
        let p = pool(10, 300);
        let spec = PartitionSpec {
            regime: Regime::NodeUnbalance,
            num_locations: 30,
            seed: 1,
            ..Default::default()
        };
        let locs = partition(&p, &spec).unwrap();
        assert_eq!(ids(&locs).len(), 3000);
        let mut dominant_count = vec![0; 10];
        for loc in &locs {
            let h = loc.class_histogram(10);
            let (arg, &max) = h.iter().enumerate().max_by_key(|(_, &v)| v).unwrap();
            dominant_count[arg] += 1;
            let share = max as f64 / loc.len() as f64;
            assert!((share - 0.7).abs() < 0.01, "share {share}");
            let others: Vec<usize> = h
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != arg)
                .map(|(_, &v)| v)
                .collect();
            assert!(others.iter().max().unwrap() - others.iter().min().unwrap() <= 1);
        }
        assert_eq!(dominant_count, vec![3; 10]);
    }

    #[test]
    fn class_unbalance_depletes_everywhere() {
        let p = pool(10, 200);
        let spec = PartitionSpec {
            regime: Regime::ClassUnbalance,
            num_locations: 4,
            ..Default::default()
        };
        let locs = partition(&p, &spec).unwrap();
        for loc in &locs {
            let h = loc.class_histogram(10);
            for c in [2, 5, 6, 7, 8] {
                assert_eq!(h[c], 5);
            }
            assert_eq!(h[0], 50);
        }
    }

    #[test]
    fn node_unbalance_missing_class() {
        let mut p = pool(3, 5);
        p.retain(|s| s.label != 2);
        p.push(Sample::new(vec![99.0], 3));
        // Labels now {1, 3}: class 2 is empty.
        let spec = PartitionSpec {
            regime: Regime::NodeUnbalance,
            num_locations: 3,
            ..Default::default()
        };
        let err = partition(&p, &spec).unwrap_err();
        assert!(err.to_string().contains("class 2"), "{err}");
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(10, &[0.5, 0.25, 0.25], &[0, 0, 0]), vec![5, 3, 2]);
        assert_eq!(
            apportion(7, &[1.0 / 3.0; 3], &[5, 0, 0])
                .iter()
                .sum::<usize>(),
            7
        );
        assert_eq!(apportion(2, &[1.0 / 3.0; 3], &[5, 0, 1]), vec![0, 1, 1]);
    }
}
