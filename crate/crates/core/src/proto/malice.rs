use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::LinearModel;
use crate::rng::{rng_for, tag, Rng as ChaRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaliceMode {
    /// A fraction of the nodes replace every coefficient with noise.
    Malicious1,
    /// Every node replaces each coefficient with noise with probability p.
    Malicious2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaliciousConfig {
    pub mode: MaliceMode,
    pub node_fraction: f64,
    pub param_probability: f64,
    pub seed: u64,
}

impl Default for MaliciousConfig {
    fn default() -> Self {
        Self {
            mode: MaliceMode::Malicious1,
            node_fraction: 0.0,
            param_probability: 0.0,
            seed: 0,
        }
    }
}

impl MaliciousConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("node_fraction", self.node_fraction),
            ("param_probability", self.param_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Replaces coefficients with standard-normal draws: all of them in
/// `Malicious1` mode, each independently with probability `p` otherwise.
pub fn corrupt(model: &LinearModel, mode: MaliceMode, p: f64, rng: &mut ChaRng) -> LinearModel {
    let mut out = model.clone();
    out.degenerate = false;
    for v in out.coefficients.iter_mut() {
        let replace = match mode {
            MaliceMode::Malicious1 => true,
            MaliceMode::Malicious2 => p > 0.0 && rng.random_bool(p.min(1.0)),
        };
        if replace {
            *v = rng.sample(StandardNormal);
        }
    }
    out
}

/// Resolved per-run corruption plan.
#[derive(Debug, Clone, PartialEq)]
pub struct MaliceSchedule {
    pub mode: MaliceMode,
    pub p: f64,
    /// Nodes whose payloads are corrupted.
    pub malicious: Vec<bool>,
    pub seed: u64,
}

impl MaliceSchedule {
    /// Picks `round(f·s)` malicious nodes uniformly at random for
    /// `Malicious1`; every node may corrupt parameters for `Malicious2`.
    pub fn new(config: &MaliciousConfig, s: usize) -> Result<Self> {
        config.validate()?;
        let malicious = match config.mode {
            MaliceMode::Malicious1 => {
                let count = (config.node_fraction * s as f64).round() as usize;
                let mut flags = vec![false; s];
                let mut rng = rng_for(config.seed, &[tag::MALICE]);
                for i in index::sample(&mut rng, s, count.min(s)) {
                    flags[i] = true;
                }
                flags
            }
            MaliceMode::Malicious2 => vec![config.param_probability > 0.0; s],
        };
        Ok(Self {
            mode: config.mode,
            p: config.param_probability,
            malicious,
            seed: config.seed,
        })
    }

    pub fn malicious_count(&self) -> usize {
        self.malicious.iter().filter(|&&m| m).count()
    }

    /// The payload node `node` sends for `class` in exchange `round`: the
    /// model itself, or one corrupted copy shared by every recipient.
    pub fn payload(
        &self,
        round: u64,
        node: usize,
        class: usize,
        model: &Arc<LinearModel>,
    ) -> Arc<LinearModel> {
        if !self.malicious.get(node).copied().unwrap_or(false) {
            return model.clone();
        }
        let mut rng = rng_for(self.seed, &[tag::MALICE, round, node as u64, class as u64]);
        Arc::new(corrupt(model, self.mode, self.p, &mut rng))
    }
}
