use std::sync::Arc;

use super::exchange::send;
use super::ProtocolConfig;
use crate::data::{LocalDataset, Sample};
use crate::error::{Error, Result};
use crate::learn::{train_svm, SvmConfig};
use crate::multiclass::{train_ova, OvaClassifier};
use crate::netsim::{
    reconcile, Bus, Encoding, Message, OverheadLedger, Payload, Phase, Procedure, Reconciliation,
};
use crate::rng::{derive_seed, tag};

#[derive(Debug, Clone)]
pub struct CloudOutcome {
    pub model: OvaClassifier,
    /// Upload traffic: every training sample shipped to the central site.
    pub ledger: OverheadLedger,
    pub reconciliation: Reconciliation,
}

/// Centralised baseline: every node uploads its raw training data to a
/// central endpoint, which trains one one-vs-all SVM on the union. Runs on
/// its own bus so protocol ledgers never carry samples.
pub fn run_cloud(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
    encoding: Encoding,
) -> Result<CloudOutcome> {
    let s = nodes.len();
    if s == 0 {
        return Err(Error::config("cloud baseline needs at least one node"));
    }
    let center = s;
    let bus = Bus::new(s + 1, encoding);
    for (l, node) in nodes.iter().enumerate() {
        send(
            &bus,
            Message {
                src: l,
                dst: center,
                phase: Phase::CloudUpload,
                class: None,
                slot: None,
                payload: Payload::Samples(Arc::new(node.samples.clone())),
            },
        )?;
    }
    let mut pool: Vec<Sample> = Vec::new();
    for msg in bus.drain(center) {
        if let Payload::Samples(samples) = msg.payload {
            pool.extend(samples.iter().cloned());
        }
    }
    let dc = pool.first().map_or(0, Sample::dim);
    let model = train_ova(&pool, k, |p, c| {
        let svm = SvmConfig {
            seed: derive_seed(config.seed, &[tag::SVM, u64::MAX, c as u64]),
            ..config.svm.clone()
        };
        train_svm(p, &svm)
    })?;
    let ledger = bus.ledger();
    Ok(CloudOutcome {
        model,
        reconciliation: reconcile(&ledger, Procedure::Cloud { n: pool.len(), dc }),
        ledger,
    })
}
