//! GreedyTL: sparse ridge regression over raw features and source-model
//! predictions, solved by forward selection and averaged over small bags.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::model::dot;
use super::{
    source_features, BinaryProblem, Cholesky, FeatureSpace, LinearModel, ModelKind, SourceSet,
};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::rng::{rng_for, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyTlConfig {
    /// Tikhonov weight λ.
    pub lambda: f64,
    /// Sparsity budget κ over transfer and feature weights.
    pub kappa: usize,
    /// Rows per bag (m).
    pub bag_size: usize,
    /// Fixed number of bags; `None` means `ceil(n / m)` capped at `max_bags`.
    pub bag_count: Option<usize>,
    pub max_bags: usize,
    /// Clamp for source margins used as features.
    pub source_clip: Option<f64>,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for GreedyTlConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            kappa: 50,
            bag_size: 50,
            bag_count: None,
            max_bags: 20,
            source_clip: Some(1.0),
            standardize: true,
            seed: 0,
        }
    }
}

impl GreedyTlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("GreedyTL lambda must be positive"));
        }
        if self.bag_size == 0 || self.bag_size < self.kappa {
            return Err(Error::config(format!(
                "bag size {} must be positive and at least kappa {}",
                self.bag_size, self.kappa
            )));
        }
        if self.bag_count == Some(0) || self.max_bags == 0 {
            return Err(Error::config("bag counts must be positive"));
        }
        if let Some(c) = self.source_clip {
            if !(c > 0.0) {
                return Err(Error::config("source clip must be positive"));
            }
        }
        Ok(())
    }

    pub fn bags_for(&self, n: usize) -> usize {
        self.bag_count
            .unwrap_or_else(|| n.div_ceil(self.bag_size).clamp(1, self.max_bags))
    }
}

/// Outcome of one forward-selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Accepted columns in acceptance order (forced columns excluded).
    pub order: Vec<usize>,
    /// Regularised objective with only the forced columns, then after each
    /// accepted column.
    pub objectives: Vec<f64>,
    /// Ridge coefficients for every column; unselected columns are zero.
    pub coefficients: Vec<f64>,
}

struct Candidate {
    b: f64,
    diag: f64,
    u: Vec<f64>,
}

/// Forward selection for `min (1/m)‖y − Aw‖² + λ‖w‖²` with at most
/// `kappa` columns besides `forced`.
///
/// At each step the column whose inclusion lowers the objective most is
/// added (lowest index wins ties); selection stops at `kappa` columns or
/// when no column improves. Each candidate's gain is evaluated in O(|S|)
/// from an appendable Cholesky factor of the selected Gram matrix.
pub fn forward_select(
    columns: &[Vec<f64>],
    targets: &[f64],
    lambda: f64,
    kappa: usize,
    forced: &[usize],
) -> Result<Selection> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config("lambda must be positive"));
    }
    let m = targets.len();
    if m == 0 {
        return Err(Error::config("forward selection needs at least one row"));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: c.len(),
        });
    }
    if columns
        .iter()
        .flatten()
        .chain(targets)
        .any(|v| !v.is_finite())
    {
        return Err(Error::Numeric("non-finite design or target value".into()));
    }
    if let Some(&f) = forced.iter().find(|&&f| f >= columns.len()) {
        return Err(Error::config(format!("forced column {f} out of range")));
    }
    let mf = m as f64;
    let yy = dot(targets, targets) / mf;
    let mut cands: Vec<Option<Candidate>> = columns
        .iter()
        .map(|c| {
            Some(Candidate {
                b: dot(c, targets) / mf,
                diag: dot(c, c) / mf + lambda,
                u: Vec::new(),
            })
        })
        .collect();
    let mut chol = Cholesky::default();
    let mut z: Vec<f64> = Vec::new();
    let mut selected: Vec<usize> = Vec::new();

    let add = |j: usize,
               cands: &mut Vec<Option<Candidate>>,
               chol: &mut Cholesky,
               z: &mut Vec<f64>,
               selected: &mut Vec<usize>|
     -> Result<()> {
        let cand = cands[j].take().expect("column not yet selected");
        let pivot_sq = cand.diag - dot(&cand.u, &cand.u);
        if !(pivot_sq > 0.0) {
            return Err(Error::Numeric(format!(
                "non-positive pivot adding column {j}"
            )));
        }
        let pivot = pivot_sq.sqrt();
        z.push((cand.b - dot(&cand.u, z)) / pivot);
        for (c, slot) in cands.iter_mut().enumerate() {
            if let Some(other) = slot {
                let g = dot(&columns[j], &columns[c]) / mf;
                let entry = (g - dot(&cand.u, &other.u)) / pivot;
                other.u.push(entry);
            }
        }
        chol.append_row(cand.u, pivot);
        selected.push(j);
        Ok(())
    };

    for &f in forced {
        if cands[f].is_some() {
            add(f, &mut cands, &mut chol, &mut z, &mut selected)?;
        }
    }
    let mut objectives = vec![yy - dot(&z, &z)];
    let mut order = Vec::new();
    let threshold = 1e-14 * yy.max(1.0);
    while order.len() < kappa {
        let mut best: Option<(usize, f64)> = None;
        for (c, slot) in cands.iter().enumerate() {
            if let Some(cand) = slot {
                let resid = cand.b - dot(&cand.u, &z);
                let denom = cand.diag - dot(&cand.u, &cand.u);
                let gain = if denom > 0.0 {
                    resid * resid / denom
                } else {
                    0.0
                };
                if best.is_none_or(|(_, g)| gain > g) {
                    best = Some((c, gain));
                }
            }
        }
        match best {
            Some((c, gain)) if gain > threshold => {
                add(c, &mut cands, &mut chol, &mut z, &mut selected)?;
                order.push(c);
                objectives.push(yy - dot(&z, &z));
            }
            _ => break,
        }
    }

    let w = chol.backward(&z);
    let mut coefficients = vec![0.0; columns.len()];
    for (&j, wj) in selected.iter().zip(w) {
        coefficients[j] = wj;
    }
    debug_assert!(selected
        .iter()
        .enumerate()
        .all(|(i, _)| chol.row(i).len() == i + 1));
    Ok(Selection {
        order,
        objectives,
        coefficients,
    })
}

/// Trains a GreedyTL model for one binary task.
///
/// Candidate columns are the clipped source margins followed by the
/// (standardised) raw features; an always-on intercept column is exempt
/// from the budget. Each bag draws `m` rows without replacement, runs
/// forward selection and refits ridge weights on the chosen support; the
/// bag models are averaged coefficient-wise. The result acts on raw
/// features with layout `[β ; ω ; b]`.
pub fn greedy_tl(
    problem: &BinaryProblem<'_>,
    sources: &SourceSet,
    config: &GreedyTlConfig,
) -> Result<LinearModel> {
    config.validate()?;
    let d = problem
        .dim()
        .ok_or_else(|| Error::config("cannot train GreedyTL on an empty dataset"))?;
    let l = sources.len();
    if let Some(src) = sources.models.first() {
        if src.space.raw_dim != d {
            return Err(Error::Dimension {
                expected: d,
                got: src.space.raw_dim,
            });
        }
    }
    let space = FeatureSpace::augmented(d, l);
    let p = space.len();
    if config.kappa > p {
        return Err(Error::config(format!(
            "kappa {} exceeds {p} columns",
            config.kappa
        )));
    }
    let n = problem.len();
    let scaler = if config.standardize {
        Standardizer::fit(problem.rows.iter().copied(), d)
    } else {
        Standardizer::identity(d)
    };
    let src_feats: Vec<Vec<f64>> = problem
        .rows
        .iter()
        .map(|x| source_features(x, sources, config.source_clip))
        .collect::<Result<_>>()?;
    let std_rows: Vec<Vec<f64>> = problem.rows.iter().map(|x| scaler.transform(x)).collect();

    let m = if config.bag_size > n {
        log::warn!(
            "GreedyTL bag size {} exceeds {n} local rows; using all rows",
            config.bag_size
        );
        n
    } else {
        config.bag_size
    };
    let bags = config.bags_for(n);
    let mut avg = vec![0.0; p];
    for bag in 0..bags {
        let mut rng = rng_for(config.seed, &[tag::GREEDY, bag as u64]);
        let rows: Vec<usize> = if m == n {
            (0..n).collect()
        } else {
            let mut r = index::sample(&mut rng, n, m).into_vec();
            r.sort_unstable();
            r
        };
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
        for c in 0..l {
            columns.push(rows.iter().map(|&i| src_feats[i][c]).collect());
        }
        for j in 0..d {
            columns.push(rows.iter().map(|&i| std_rows[i][j]).collect());
        }
        columns.push(vec![1.0; rows.len()]);
        let targets: Vec<f64> = rows.iter().map(|&i| problem.targets[i]).collect();
        let sel = forward_select(&columns, &targets, config.lambda, config.kappa, &[p - 1])?;
        avg.iter_mut()
            .zip(&sel.coefficients)
            .for_each(|(a, c)| *a += c);
    }
    avg.iter_mut().for_each(|a| *a /= bags as f64);
    let (head, tail) = avg.split_at_mut(p - 1);
    scaler.fold(&mut head[l..], &mut tail[0]);
    LinearModel::new(space, ModelKind::Gtl, avg)
}
