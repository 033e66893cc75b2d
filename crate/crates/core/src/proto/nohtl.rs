use std::sync::Arc;

use super::exchange::{
    gather, index_models, ordered_models, send_models, train_base, ModelTable, ROUND_STEP1,
};
use super::{MaliceSchedule, ProtocolConfig, VoteEnsemble};
use crate::data::LocalDataset;
use crate::error::{Error, Result};
use crate::learn::LinearModel;
use crate::multiclass::{consensus_mean, OvaClassifier};
use crate::netsim::{Bus, OverheadLedger, Phase};

#[derive(Debug, Clone)]
pub struct NohtlMuOutcome {
    pub base: Vec<OvaClassifier>,
    /// The mean model every node ends up holding.
    pub mean: OvaClassifier,
    pub ledger: OverheadLedger,
}

#[derive(Debug, Clone)]
pub struct NohtlMvOutcome {
    pub base: Vec<OvaClassifier>,
    /// Per node: vote over all local models.
    pub vote: Vec<VoteEnsemble>,
    pub ledger: OverheadLedger,
}

fn check(nodes: &[LocalDataset], config: &ProtocolConfig, bus: &Bus) -> Result<()> {
    let s = nodes.len();
    if s < 2 {
        return Err(Error::config("noHTL needs at least two nodes"));
    }
    config.validate(s)?;
    if bus.nodes() < s {
        return Err(Error::config(format!(
            "bus has {} endpoints for {s} nodes",
            bus.nodes()
        )));
    }
    Ok(())
}

fn raw_classifiers(base: ModelTable) -> Result<Vec<OvaClassifier>> {
    base.into_iter()
        .map(|m| OvaClassifier::new(m, Vec::new(), None))
        .collect()
}

pub(crate) fn mean_per_class(per_class: &[Vec<Arc<LinearModel>>]) -> Result<Vec<Arc<LinearModel>>> {
    per_class
        .iter()
        .map(|models| {
            let refs: Vec<&LinearModel> = models.iter().map(|m| m.as_ref()).collect();
            consensus_mean(&refs).map(Arc::new)
        })
        .collect()
}

/// Consensus through one collector: local SVMs are uploaded, averaged per
/// class at the collector and the mean is sent back to every node.
pub fn run_nohtl_mu(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
    malice: Option<&MaliceSchedule>,
    bus: &Bus,
) -> Result<NohtlMuOutcome> {
    check(nodes, config, bus)?;
    let s = nodes.len();
    let collector = config.collector_id;
    let all: Vec<usize> = (0..s).collect();
    let base = train_base(nodes, k, config)?;
    for (l, models) in base.iter().enumerate().filter(|(l, _)| *l != collector) {
        send_models(
            bus,
            Phase::CollectorUp,
            l,
            &[collector],
            models,
            malice.map(|m| (m, ROUND_STEP1)),
        )?;
    }
    let received = index_models(gather(bus, collector, Phase::CollectorUp, (s - 1) * k)?)?;
    let per_class = ordered_models(collector, &base[collector], &received, &all, k)?;
    let means = mean_per_class(&per_class)?;
    send_models(bus, Phase::CollectorDown, collector, &all, &means, None)?;
    for l in all.iter().filter(|&&l| l != collector) {
        gather(bus, *l, Phase::CollectorDown, k)?;
    }
    Ok(NohtlMuOutcome {
        base: raw_classifiers(base)?,
        mean: OvaClassifier::new(means, Vec::new(), None)?,
        ledger: bus.ledger(),
    })
}

/// Every local model goes to every node, which predicts by majority vote
/// over all of them.
pub fn run_nohtl_mv(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
    malice: Option<&MaliceSchedule>,
    bus: &Bus,
) -> Result<NohtlMvOutcome> {
    check(nodes, config, bus)?;
    let s = nodes.len();
    let all: Vec<usize> = (0..s).collect();
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
    let mut vote = Vec::with_capacity(s);
    for l in 0..s {
        let received = index_models(gather(bus, l, Phase::Step1, (s - 1) * k)?)?;
        let per_class = ordered_models(l, &base[l], &received, &all, k)?;
        let members = (0..s)
            .map(|j| {
                OvaClassifier::new(
                    per_class.iter().map(|ms| ms[j].clone()).collect(),
                    Vec::new(),
                    None,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        vote.push(VoteEnsemble { members });
    }
    Ok(NohtlMvOutcome {
        base: raw_classifiers(base)?,
        vote,
        ledger: bus.ledger(),
    })
}
