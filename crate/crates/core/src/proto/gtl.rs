use std::sync::Arc;

use super::exchange::{
    gather, index_models, ordered_models, send_models, train_base, train_transfer, ROUND_STEP1,
    ROUND_STEP3,
};
use super::{MaliceSchedule, ProtocolConfig, VoteEnsemble};
use crate::data::LocalDataset;
use crate::error::{Error, Result};
use crate::learn::{LinearModel, SourceSet};
use crate::multiclass::{consensus_mean, OvaClassifier};
use crate::netsim::{Bus, OverheadLedger, Phase};

/// Per-node models after each GTL step.
#[derive(Debug, Clone)]
pub struct GtlOutcome {
    /// Step 0 local SVMs.
    pub base: Vec<OvaClassifier>,
    /// Step 2 GreedyTL models with each node's own source sets.
    pub step2: Vec<OvaClassifier>,
    /// Step 4 mean of all GreedyTL models, per node.
    pub mean: Vec<OvaClassifier>,
    /// Step 4 majority vote over all GreedyTL models, per node.
    pub vote: Vec<VoteEnsemble>,
    pub ledger: OverheadLedger,
}

/// GTL over `nodes`, which use bus ids `0..nodes.len()`.
///
/// 0. every node trains one-vs-all SVMs on its data;
/// 1. every model goes to every other node (possibly corrupted);
/// 2. each node retrains every class with GreedyTL, using all nodes'
///    class models (its own included, in id order) as sources;
/// 3. every GreedyTL model goes to every other node;
/// 4. each node averages the GreedyTL models in the augmented space and/or
///    votes over them.
pub fn run_gtl(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
    malice: Option<&MaliceSchedule>,
    bus: &Bus,
) -> Result<GtlOutcome> {
    if nodes.len() < 2 {
        return Err(Error::config("GTL needs at least two nodes"));
    }
    gtl_round(nodes, k, config, malice, bus, None)
}

/// One GTL round. `extra` adds one more source model per class after the
/// node models (used by the dynamic scenario).
pub(crate) fn gtl_round(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
    malice: Option<&MaliceSchedule>,
    bus: &Bus,
    extra: Option<&[Arc<LinearModel>]>,
) -> Result<GtlOutcome> {
    let s = nodes.len();
    config.validate(s)?;
    if bus.nodes() < s {
        return Err(Error::config(format!(
            "bus has {} endpoints for {s} nodes",
            bus.nodes()
        )));
    }
    let all: Vec<usize> = (0..s).collect();
    let clip = config.greedy.source_clip;

    let base = train_base(nodes, k, config)?;
    for (l, models) in base.iter().enumerate() {
        send_models(
            bus,
            Phase::Step1,
            l,
            &all,
            models,
            malice.map(|m| (m, ROUND_STEP1)),
        )?;
    }
    let mut sources: Vec<Vec<SourceSet>> = Vec::with_capacity(s);
    for l in 0..s {
        let received = index_models(gather(bus, l, Phase::Step1, (s - 1) * k)?)?;
        let per_class = ordered_models(l, &base[l], &received, &all, k)?;
        sources.push(
            per_class
                .into_iter()
                .enumerate()
                .map(|(c, mut models)| {
                    if let Some(extra) = extra {
                        models.push(extra[c].clone());
                    }
                    SourceSet::new(models)
                })
                .collect::<Result<_>>()?,
        );
    }

    let transfer = train_transfer(nodes, &all, &sources, k, config)?;
    let step3_malice = if config.corrupt_step3 {
        malice.map(|m| (m, ROUND_STEP3))
    } else {
        None
    };
    for (l, models) in transfer.iter().enumerate() {
        send_models(bus, Phase::Step3, l, &all, models, step3_malice)?;
    }

    let mut mean = Vec::new();
    let mut vote = Vec::new();
    for l in 0..s {
        let received = index_models(gather(bus, l, Phase::Step3, (s - 1) * k)?)?;
        let per_class = ordered_models(l, &transfer[l], &received, &all, k)?;
        if config.aggregation.mean() {
            let means = per_class
                .iter()
                .map(|models| {
                    let refs: Vec<&LinearModel> = models.iter().map(|m| m.as_ref()).collect();
                    consensus_mean(&refs).map(Arc::new)
                })
                .collect::<Result<Vec<_>>>()?;
            mean.push(OvaClassifier::new(means, sources[l].clone(), clip)?);
        }
        if config.aggregation.majority() {
            let members = (0..s)
                .map(|j| {
                    let models = per_class.iter().map(|ms| ms[j].clone()).collect();
                    OvaClassifier::new(models, sources[l].clone(), clip)
                })
                .collect::<Result<Vec<_>>>()?;
            vote.push(VoteEnsemble { members });
        }
    }

    let step2 = transfer
        .into_iter()
        .zip(&sources)
        .map(|(models, src)| OvaClassifier::new(models, src.clone(), clip))
        .collect::<Result<Vec<_>>>()?;
    let base = base
        .into_iter()
        .map(|models| OvaClassifier::new(models, Vec::new(), None))
        .collect::<Result<Vec<_>>>()?;
    Ok(GtlOutcome {
        base,
        step2,
        mean,
        vote,
        ledger: bus.ledger(),
    })
}
