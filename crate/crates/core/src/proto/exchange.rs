//! Building blocks shared by the procedures.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{MaliceSchedule, ProtocolConfig};
use crate::data::LocalDataset;
use crate::error::{Error, Result};
use crate::learn::{
    greedy_tl, train_svm, BinaryProblem, GreedyTlConfig, LinearModel, SourceSet, SvmConfig,
};
use crate::multiclass::train_ova;
use crate::netsim::{Bus, Message, Payload, Phase};
use crate::rng::{derive_seed, tag};

/// Per node, per class (index `c - 1`) models.
pub(crate) type ModelTable = Vec<Vec<Arc<LinearModel>>>;

/// Exchange rounds, used to separate corruption streams.
pub(crate) const ROUND_STEP1: u64 = 1;
pub(crate) const ROUND_STEP3: u64 = 3;

/// Step 0: local one-vs-all SVMs, nodes in parallel.
pub(crate) fn train_base(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
) -> Result<ModelTable> {
    nodes
        .par_iter()
        .map(|node| {
            let clf = train_ova(&node.samples, k, |p, c| {
                let svm = SvmConfig {
                    seed: derive_seed(config.seed, &[tag::SVM, node.location_id as u64, c as u64]),
                    ..config.svm.clone()
                };
                train_svm(p, &svm)
            })
            .map_err(|e| Error::protocol("step0", format!("node {}: {e}", node.location_id)))?;
            Ok(clf.models)
        })
        .collect()
}

/// Step 2: GreedyTL per class on each listed node, with that node's
/// per-class source sets.
pub(crate) fn train_transfer(
    nodes: &[LocalDataset],
    ids: &[usize],
    sources: &[Vec<SourceSet>],
    k: usize,
    config: &ProtocolConfig,
) -> Result<ModelTable> {
    ids.par_iter()
        .zip(sources.par_iter())
        .map(|(&id, node_sources)| {
            let node = &nodes[id];
            (1..=k)
                .into_par_iter()
                .map(|c| {
                    let cfg = GreedyTlConfig {
                        seed: derive_seed(
                            config.seed,
                            &[tag::GREEDY, node.location_id as u64, c as u64],
                        ),
                        ..config.greedy.clone()
                    };
                    let problem = BinaryProblem::one_vs_rest(&node.samples, c);
                    greedy_tl(&problem, &node_sources[c - 1], &cfg)
                        .map(Arc::new)
                        .map_err(|e| {
                            Error::protocol(
                                "step2",
                                format!("node {}, class {c}: {e}", node.location_id),
                            )
                        })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub(crate) fn send(bus: &Bus, msg: Message) -> Result<()> {
    let phase = msg.phase;
    bus.send(msg)
        .map(|_| ())
        .map_err(|e| Error::protocol(phase.as_str(), e.to_string()))
}

/// Sends each of `models` (one per class) from `src` to every `dst`,
/// applying the corruption schedule once per model.
pub(crate) fn send_models(
    bus: &Bus,
    phase: Phase,
    src: usize,
    dsts: &[usize],
    models: &[Arc<LinearModel>],
    malice: Option<(&MaliceSchedule, u64)>,
) -> Result<()> {
    for (c, model) in models.iter().enumerate() {
        let payload = match malice {
            Some((sched, round)) => sched.payload(round, src, c + 1, model),
            None => model.clone(),
        };
        for &dst in dsts.iter().filter(|&&d| d != src) {
            send(
                bus,
                Message {
                    src,
                    dst,
                    phase,
                    class: Some(c + 1),
                    slot: None,
                    payload: Payload::Model(payload.clone()),
                },
            )?;
        }
    }
    Ok(())
}

/// Barrier: drains `dst`'s mailbox and checks that exactly `expected`
/// messages of `phase` arrived.
pub(crate) fn gather(bus: &Bus, dst: usize, phase: Phase, expected: usize) -> Result<Vec<Message>> {
    let msgs = bus.drain(dst);
    if let Some(m) = msgs.iter().find(|m| m.phase != phase) {
        return Err(Error::protocol(
            phase.as_str(),
            format!(
                "node {dst} got an unexpected {} message from {}",
                m.phase, m.src
            ),
        ));
    }
    if msgs.len() != expected {
        return Err(Error::protocol(
            phase.as_str(),
            format!(
                "node {dst} received {} of {expected} expected models",
                msgs.len()
            ),
        ));
    }
    Ok(msgs)
}

/// Received models indexed by `(src, class)`.
pub(crate) fn index_models(
    msgs: Vec<Message>,
) -> Result<BTreeMap<(usize, usize), Arc<LinearModel>>> {
    let mut out = BTreeMap::new();
    for m in msgs {
        let class = m
            .class
            .ok_or_else(|| Error::protocol(m.phase.as_str(), "model without class tag"))?;
        match m.payload {
            Payload::Model(model) => {
                out.insert((m.src, class), model);
            }
            Payload::Samples(_) => {
                return Err(Error::protocol(
                    m.phase.as_str(),
                    "raw samples on a model exchange",
                ));
            }
        }
    }
    Ok(out)
}

/// Per-class models of `participants` in id order, taking `own` for node
/// `me` and the received copy for everyone else.
pub(crate) fn ordered_models(
    me: usize,
    own: &[Arc<LinearModel>],
    received: &BTreeMap<(usize, usize), Arc<LinearModel>>,
    participants: &[usize],
    k: usize,
) -> Result<Vec<Vec<Arc<LinearModel>>>> {
    (1..=k)
        .map(|c| {
            participants
                .iter()
                .map(|&p| {
                    if p == me {
                        Ok(own[c - 1].clone())
                    } else {
                        received.get(&(p, c)).cloned().ok_or_else(|| {
                            Error::protocol(
                                "barrier",
                                format!("node {me} lacks class {c} from {p}"),
                            )
                        })
                    }
                })
                .collect()
        })
        .collect()
}
