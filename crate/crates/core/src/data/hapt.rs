//! Loader for the UCI smartphone activity/postural-transition feature files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng as _;

use super::{LocalDataset, Sample};
use crate::error::{Error, Result};
use crate::rng::{rng_for, tag};

pub const HAPT_DIM: usize = 561;
pub const HAPT_CLASSES: usize = 12;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn find(dir: &Path, split_dir: &str, name: &str) -> Option<PathBuf> {
    [dir.join(split_dir).join(name), dir.join(name)]
        .into_iter()
        .find(|p| p.is_file())
}

fn parse_ints(path: &Path) -> Result<Vec<usize>> {
    read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

fn parse_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let row: Vec<f64> = l
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
            if row.len() != HAPT_DIM {
                return Err(Error::format(
                    path,
                    format!("line {}: {} columns, expected {HAPT_DIM}", i + 1, row.len()),
                ));
            }
            Ok(row)
        })
        .collect()
}

/// Loads both the `Train` and `Test` splits, tagging each sample with the
/// id of the volunteer who produced it.
pub fn load_hapt(dir: &Path) -> Result<Vec<(usize, Sample)>> {
    let mut out = Vec::new();
    let mut found = false;
    for (split_dir, split) in [("Train", "train"), ("Test", "test")] {
        let x = find(dir, split_dir, &format!("X_{split}.txt"));
        let y = find(dir, split_dir, &format!("y_{split}.txt"));
        let subj = find(dir, split_dir, &format!("subject_id_{split}.txt"));
        let (x, y, subj) = match (x, y, subj) {
            (Some(x), Some(y), Some(s)) => (x, y, s),
            (None, None, None) => continue,
            _ => {
                return Err(Error::format(
                    dir.join(split_dir),
                    format!("incomplete {split} split: need X_, y_ and subject_id_ files"),
                ))
            }
        };
        found = true;
        let features = parse_features(&x)?;
        let labels = parse_ints(&y)?;
        let users = parse_ints(&subj)?;
        if features.len() != labels.len() || labels.len() != users.len() {
            return Err(Error::format(
                &y,
                format!(
                    "row count mismatch: {} feature rows, {} labels, {} subject ids",
                    features.len(),
                    labels.len(),
                    users.len()
                ),
            ));
        }
        for (i, ((f, label), user)) in features.into_iter().zip(labels).zip(users).enumerate() {
            if !(1..=HAPT_CLASSES).contains(&label) {
                return Err(Error::format(
                    &y,
                    format!("line {}: class {label} outside 1..={HAPT_CLASSES}", i + 1),
                ));
            }
            out.push((user, Sample::new(f, label)));
        }
    }
    if !found {
        return Err(Error::format(dir, "no HAPT feature files found"));
    }
    Ok(out)
}

/// Keeps the users that performed every class and spreads the samples of
/// the remaining users uniformly at random over them.
///
/// Locations are numbered `0..` in ascending order of the kept user ids.
pub fn hapt_redistribute(tagged: &[(usize, Sample)], seed: u64) -> Result<Vec<LocalDataset>> {
    let k = tagged.iter().map(|(_, s)| s.label).max().unwrap_or(0);
    let mut by_user: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    for (user, sample) in tagged {
        by_user.entry(*user).or_default().push(sample.clone());
    }
    let complete = |samples: &[Sample]| {
        let mut seen = vec![false; k];
        samples.iter().for_each(|s| seen[s.label - 1] = true);
        seen.into_iter().all(|b| b)
    };
    let (full, partial): (Vec<_>, Vec<_>) = by_user
        .into_iter()
        .partition(|(_, samples)| complete(samples));
    if full.len() < 2 {
        return Err(Error::config(format!(
            "only {} users cover all {k} classes; need at least 2",
            full.len()
        )));
    }
    let mut locations: Vec<LocalDataset> = full
        .into_iter()
        .enumerate()
        .map(|(loc, (_, samples))| LocalDataset::new(loc, samples))
        .collect();
    let mut rng = rng_for(seed, &[tag::REDISTRIBUTE]);
    let n = locations.len();
    for (_, samples) in partial {
        for s in samples {
            locations[rng.random_range(0..n)].samples.push(s);
        }
    }
    Ok(locations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fmt::Write as _;

    fn write_split(dir: &Path, split_dir: &str, split: &str, rows: &[(usize, usize)]) {
        let d = dir.join(split_dir);
        std::fs::create_dir_all(&d).unwrap();
        let mut x = String::new();
        let mut y = String::new();
        let mut s = String::new();
        for (i, &(label, user)) in rows.iter().enumerate() {
            let row: Vec<String> = (0..HAPT_DIM)
                .map(|j| format!("{:.6e}", (i * 31 + j) as f64 * 1e-3 - 0.5))
                .collect();
            writeln!(x, " {}", row.join(" ")).unwrap();
            writeln!(y, "{label}").unwrap();
            writeln!(s, "{user}").unwrap();
        }
        std::fs::write(d.join(format!("X_{split}.txt")), x).unwrap();
        std::fs::write(d.join(format!("y_{split}.txt")), y).unwrap();
        std::fs::write(d.join(format!("subject_id_{split}.txt")), s).unwrap();
    }

    #[test]
    fn loads_both_splits() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "Train", "train", &[(1, 1), (12, 1), (5, 2)]);
        write_split(dir.path(), "Test", "test", &[(3, 3)]);
        let data = load_hapt(dir.path()).unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(data[3].0, 3);
        assert_eq!(data[1].1.label, 12);
        assert_eq!(data[0].1.dim(), HAPT_DIM);
    }

    #[test]
    fn unknown_class_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "Train", "train", &[(13, 1)]);
        assert!(matches!(load_hapt(dir.path()), Err(Error::Format { .. })));
    }

    #[test]
    fn row_mismatch_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        write_split(dir.path(), "Train", "train", &[(1, 1), (2, 1)]);
        std::fs::write(dir.path().join("Train/subject_id_train.txt"), "1\n").unwrap();
        let err = load_hapt(dir.path()).unwrap_err();
        assert!(err.to_string().contains("row count mismatch"), "{err}");
    }

    fn tagged(users: &[(usize, &[usize])]) -> Vec<(usize, Sample)> {
        users
            .iter()
            .flat_map(|&(u, labels)| {
                labels
                    .iter()
                    .map(move |&l| (u, Sample::new(vec![u as f64], l)))
            })
            .collect()
    }

    #[test]
    fn redistributes_incomplete_users() {
        let data = tagged(&[
            (1, &[1, 2, 3]),
            (2, &[1, 2]),
            (3, &[3, 2, 1, 1]),
            (4, &[1, 2, 3]),
            (5, &[3]),
        ]);
        let locs = hapt_redistribute(&data, 11).unwrap();
        assert_eq!(locs.len(), 3);
        assert_eq!(
            locs.iter().map(LocalDataset::len).sum::<usize>(),
            data.len()
        );
        for loc in &locs {
            assert!(loc.class_histogram(3).iter().all(|&c| c > 0));
        }
        assert_eq!(hapt_redistribute(&data, 11).unwrap(), locs);
    }

    #[test]
    fn all_complete_is_identity() {
        let data = tagged(&[(4, &[1, 2]), (9, &[2, 1, 1])]);
        let locs = hapt_redistribute(&data, 0).unwrap();
        assert_eq!(locs[0].samples.len(), 2);
        assert_eq!(locs[1].samples.len(), 3);
        assert!(locs[1].samples.iter().all(|s| s.features[0] == 9.0));
    }

    #[test]
    fn too_few_complete_users() {
        let data = tagged(&[(1, &[1, 2]), (2, &[1])]);
        assert!(matches!(hapt_redistribute(&data, 0), Err(Error::Config(_))));
    }
}
