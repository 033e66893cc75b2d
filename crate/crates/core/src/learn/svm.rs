//! L2-regularised hinge-loss linear SVM trained by dual coordinate descent.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::dot;
use super::{BinaryProblem, FeatureSpace, LinearModel, ModelKind};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::rng::{rng_for, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    /// Hinge-loss weight `C`.
    pub c: f64,
    pub max_epochs: usize,
    /// Stop once every projected gradient is below this value.
    pub tolerance: f64,
    /// Z-score the inputs on the training rows before fitting.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 200,
            tolerance: 1e-6,
            standardize: true,
            seed: 0,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::config("SVM C must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("SVM tolerance must be positive"));
        }
        Ok(())
    }
}

/// Trains `min ½‖w‖² + C Σ max(0, 1 − yᵢ wᵀzᵢ)` where `zᵢ` is the
/// (optionally standardised) row with a constant 1 appended for the bias.
///
/// The returned model acts on raw features. A single-class problem yields
/// the constant classifier of that class, flagged degenerate.
pub fn train_svm(problem: &BinaryProblem<'_>, config: &SvmConfig) -> Result<LinearModel> {
    config.validate()?;
    let d = problem
        .dim()
        .ok_or_else(|| Error::config("cannot train on an empty dataset"))?;
    let space = FeatureSpace::raw(d);
    if let Some(sign) = problem.single_class() {
        return Ok(LinearModel::constant(space, ModelKind::Base, sign));
    }

    let scaler = if config.standardize {
        Standardizer::fit(problem.rows.iter().copied(), d)
    } else {
        Standardizer::identity(d)
    };
    let n = problem.len();
    let width = d + 1;
    let mut z = vec![0.0; n * width];
    for (i, row) in problem.rows.iter().enumerate() {
        let zi = &mut z[i * width..(i + 1) * width];
        scaler.transform_into(row, &mut zi[..d]);
        zi[d] = 1.0;
    }
    let qd: Vec<f64> = z.chunks(width).map(|r| dot(r, r)).collect();
    let y = &problem.targets;
    let c = config.c;

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; width];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(config.seed, &[tag::SVM]);
    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut max_pg = 0.0f64;
        for &i in &order {
            let zi = &z[i * width..(i + 1) * width];
            let g = y[i] * dot(&w, zi) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg.abs() > 1e-12 && qd[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y[i];
                w.iter_mut().zip(zi).for_each(|(wj, v)| *wj += step * v);
            }
        }
        if max_pg <= config.tolerance {
            break;
        }
    }

    let mut intercept = w[d];
    let mut weights = w[..d].to_vec();
    scaler.fold(&mut weights, &mut intercept);
    weights.push(intercept);
    LinearModel::new(space, ModelKind::Base, weights)
}

/// `½‖coef‖² + C Σ hinge` with the intercept treated as a weight.
pub fn hinge_objective(model: &LinearModel, problem: &BinaryProblem<'_>, c: f64) -> Result<f64> {
    let mut loss = 0.0;
    for (row, y) in problem.rows.iter().zip(&problem.targets) {
        loss += (1.0 - y * model.raw_margin(row)?).max(0.0);
    }
    Ok(0.5 * dot(&model.coefficients, &model.coefficients) + c * loss)
}
