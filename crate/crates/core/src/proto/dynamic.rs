use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::exchange::{gather, index_models, ordered_models, send_models, train_base};
use super::gtl::gtl_round;
use super::nohtl::mean_per_class;
use super::{Aggregation, ProtocolConfig, ProtocolKind};
use crate::data::LocalDataset;
use crate::error::{Error, Result};
use crate::learn::{FeatureSpace, LinearModel, ModelKind, SourceSet};
use crate::multiclass::OvaClassifier;
use crate::netsim::{reconcile, Bus, Encoding, OverheadLedger, Phase, Procedure, Reconciliation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicConfig {
    /// Weight of the stored model in `m ← α·m + (1 − α)·m′`.
    pub alpha: f64,
    /// Devices arriving per learning phase.
    pub batch_size: usize,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            batch_size: 4,
        }
    }
}

impl DynamicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DynamicPhase {
    pub index: usize,
    /// Location ids of the devices that took part.
    pub newcomers: Vec<usize>,
    /// Training samples held by the newcomers.
    pub samples: usize,
    /// Stored aggregate after the merge (raw space).
    pub model: OvaClassifier,
    pub ledger: OverheadLedger,
    pub reconciliation: Reconciliation,
}

#[derive(Debug, Clone, Default)]
pub struct DynamicOutcome {
    pub phases: Vec<DynamicPhase>,
}

/// Rewrites an augmented model as a raw-space model by expanding each
/// transfer term `βⱼ·hⱼ(x)` linearly. Exact for unclipped sources.
pub fn flatten(model: &LinearModel, sources: &SourceSet) -> Result<LinearModel> {
    let d = model.space.raw_dim;
    if sources.len() != model.space.sources {
        return Err(Error::Dimension {
            expected: model.space.sources,
            got: sources.len(),
        });
    }
    let mut coef: Vec<f64> = model.omega().to_vec();
    coef.push(model.intercept());
    for (beta, src) in model.beta().iter().zip(&sources.models) {
        if src.space.raw_dim != d {
            return Err(Error::Dimension {
                expected: d,
                got: src.space.raw_dim,
            });
        }
        coef.iter_mut()
            .zip(&src.coefficients)
            .for_each(|(c, v)| *c += beta * v);
    }
    LinearModel::new(FeatureSpace::raw(d), ModelKind::Aggregate, coef)
}

fn merge(old: &LinearModel, new: &LinearModel, alpha: f64) -> Result<LinearModel> {
    let coef = old
        .coefficients
        .iter()
        .zip(&new.coefficients)
        .map(|(o, n)| alpha * o + (1.0 - alpha) * n)
        .collect();
    LinearModel::new(old.space, ModelKind::Aggregate, coef)
}

/// Continuous learning with a permanent device `G` that stores the
/// aggregate `m` (one raw-space model per class).
///
/// For each batch of arriving devices: `G` sends `m` to them; they run GTL
/// with `m` as an additional source (`DynGtl`) or upload their local SVMs
/// to `G` (`DynNohtl`); the resulting aggregate `m′` is merged into `m` by
/// an exponential moving average. The first batch initialises `m = m′`.
/// Empty batches are skipped. Each phase runs on a fresh bus whose last
/// endpoint is `G`.
pub fn run_dynamic(
    batches: &[Vec<LocalDataset>],
    k: usize,
    kind: ProtocolKind,
    dynamic: &DynamicConfig,
    config: &ProtocolConfig,
    encoding: Encoding,
) -> Result<DynamicOutcome> {
    dynamic.validate()?;
    if !matches!(kind, ProtocolKind::DynGtl | ProtocolKind::DynNohtl) {
        return Err(Error::config(format!(
            "{kind:?} is not a dynamic procedure"
        )));
    }
    let config = ProtocolConfig {
        aggregation: Aggregation::Mean,
        collector_id: 0,
        ..config.clone()
    };
    let mut stored: Option<Vec<Arc<LinearModel>>> = None;
    let mut out = DynamicOutcome::default();
    for batch in batches.iter().filter(|b| !b.is_empty()) {
        let s = batch.len();
        let g = s;
        let bus = Bus::new(s + 1, encoding);
        let all: Vec<usize> = (0..s).collect();
        let initial = stored.is_none();
        let mut received_m = None;
        if let Some(m) = &stored {
            send_models(&bus, Phase::DynG, g, &all, m, None)?;
            for l in 0..s {
                let got = index_models(gather(&bus, l, Phase::DynG, k)?)?;
                if l == 0 {
                    received_m = Some((1..=k).map(|c| got[&(g, c)].clone()).collect::<Vec<_>>());
                }
            }
        }

        let new_models: Vec<Arc<LinearModel>> = match kind {
            ProtocolKind::DynGtl => {
                let round = gtl_round(batch, k, &config, None, &bus, received_m.as_deref())?;
                let lead = &round.mean[0];
                let flat = lead
                    .models
                    .iter()
                    .zip(&lead.sources)
                    .map(|(m, src)| flatten(m, src).map(Arc::new))
                    .collect::<Result<Vec<_>>>()?;
                send_models(&bus, Phase::DynG, 0, &[g], &flat, None)?;
                let got = index_models(gather(&bus, g, Phase::DynG, k)?)?;
                (1..=k).map(|c| got[&(0, c)].clone()).collect()
            }
            _ => {
                let base = train_base(batch, k, &config)?;
                for (l, models) in base.iter().enumerate() {
                    send_models(&bus, Phase::CollectorUp, l, &[g], models, None)?;
                }
                let received = index_models(gather(&bus, g, Phase::CollectorUp, s * k)?)?;
                // G holds no local model of its own: order the uploads by sender.
                let per_class = ordered_models(g, &[], &received, &all, k)?;
                mean_per_class(&per_class)?
            }
        };

        let merged: Vec<Arc<LinearModel>> = match &stored {
            None => new_models,
            Some(old) => old
                .iter()
                .zip(&new_models)
                .map(|(o, n)| merge(o, n, dynamic.alpha).map(Arc::new))
                .collect::<Result<_>>()?,
        };
        stored = Some(merged.clone());
        let ledger = bus.ledger();
        let procedure = match kind {
            ProtocolKind::DynGtl => Procedure::DynGtl { s, k, initial },
            _ => Procedure::DynNohtl { s, k, initial },
        };
        out.phases.push(DynamicPhase {
            index: out.phases.len(),
            newcomers: batch.iter().map(|n| n.location_id).collect(),
            samples: batch.iter().map(LocalDataset::len).sum(),
            model: OvaClassifier::new(merged, Vec::new(), None)?,
            reconciliation: reconcile(&ledger, procedure),
            ledger,
        });
    }
    Ok(out)
}
