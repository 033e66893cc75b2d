use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::index;

use super::exchange::{
    gather, index_models, ordered_models, send, send_models, train_base, train_transfer,
    ROUND_STEP1, ROUND_STEP3,
};
use super::nohtl::mean_per_class;
use super::{MaliceSchedule, ProtocolConfig};
use crate::data::LocalDataset;
use crate::error::{Error, Result};
use crate::learn::{FeatureSpace, LinearModel, ModelKind, SourceSet, ZERO_EPS};
use crate::multiclass::OvaClassifier;
use crate::netsim::{Bus, Message, OverheadLedger, Payload, Phase};
use crate::rng::{rng_for, tag};

#[derive(Debug, Clone)]
pub struct LimitedOutcome {
    /// Aggregator ids, ascending.
    pub aggregators: Vec<usize>,
    pub base: Vec<OvaClassifier>,
    /// Final classifier held by each node.
    pub finals: Vec<OvaClassifier>,
    pub ledger: OverheadLedger,
}

/// Aggregator ids: the lowest `a` ids, or `a` ids drawn with the run seed.
pub fn choose_aggregators(s: usize, a: usize, random: bool, seed: u64) -> Vec<usize> {
    let mut ids: Vec<usize> = if random {
        index::sample(&mut rng_for(seed, &[tag::AGGREGATORS]), s, a).into_vec()
    } else {
        (0..a).collect()
    };
    ids.sort_unstable();
    ids
}

/// GTL with only `a` aggregator nodes doing the transfer step.
///
/// Every node sends its Step-0 models to the aggregators only; aggregators
/// run GreedyTL with all `s` models as sources, exchange their GreedyTL
/// models among themselves and average them. The lowest-id aggregator then
/// sends the averaged models to every other node, together with the
/// source models that carry a non-zero transfer weight, so that receivers
/// can evaluate them. With `a = s` this is exactly [`run_gtl`](super::run_gtl).
pub fn run_gtl_limited(
    nodes: &[LocalDataset],
    k: usize,
    config: &ProtocolConfig,
    malice: Option<&MaliceSchedule>,
    bus: &Bus,
) -> Result<LimitedOutcome> {
    let s = nodes.len();
    if s < 2 {
        return Err(Error::config("limited GTL needs at least two nodes"));
    }
    config.validate(s)?;
    if bus.nodes() < s {
        return Err(Error::config(format!(
            "bus has {} endpoints for {s} nodes",
            bus.nodes()
        )));
    }
    let a = config.num_aggregators.unwrap_or(s);
    let aggs = choose_aggregators(s, a, config.random_aggregators, config.seed);
    let all: Vec<usize> = (0..s).collect();
    let clip = config.greedy.source_clip;

    let base = train_base(nodes, k, config)?;
    for (l, models) in base.iter().enumerate() {
        send_models(
            bus,
            Phase::Step1,
            l,
            &aggs,
            models,
            malice.map(|m| (m, ROUND_STEP1)),
        )?;
    }
    let mut sources: Vec<Vec<SourceSet>> = Vec::with_capacity(a);
    for &g in &aggs {
        let received = index_models(gather(bus, g, Phase::Step1, (s - 1) * k)?)?;
        let per_class = ordered_models(g, &base[g], &received, &all, k)?;
        sources.push(
            per_class
                .into_iter()
                .map(SourceSet::new)
                .collect::<Result<_>>()?,
        );
    }

    let transfer = train_transfer(nodes, &aggs, &sources, k, config)?;
    let step3_malice = if config.corrupt_step3 {
        malice.map(|m| (m, ROUND_STEP3))
    } else {
        None
    };
    for (i, &g) in aggs.iter().enumerate() {
        send_models(bus, Phase::Step3, g, &aggs, &transfer[i], step3_malice)?;
    }
    let mut agg_finals: BTreeMap<usize, OvaClassifier> = BTreeMap::new();
    for (i, &g) in aggs.iter().enumerate() {
        let received = index_models(gather(bus, g, Phase::Step3, (a - 1) * k)?)?;
        let per_class = ordered_models(g, &transfer[i], &received, &aggs, k)?;
        let means = mean_per_class(&per_class)?;
        agg_finals.insert(g, OvaClassifier::new(means, sources[i].clone(), clip)?);
    }

    let lead = aggs[0];
    let lead_final = agg_finals[&lead].clone();
    let others: Vec<usize> = all.iter().copied().filter(|l| !aggs.contains(l)).collect();
    send_models(
        bus,
        Phase::CollectorDown,
        lead,
        &others,
        &lead_final.models,
        None,
    )?;
    let mut forwarded = 0;
    for (c, model) in lead_final.models.iter().enumerate() {
        for (j, beta) in model.beta().iter().enumerate() {
            if beta.abs() <= ZERO_EPS {
                continue;
            }
            forwarded += 1;
            for &dst in &others {
                send(
                    bus,
                    Message {
                        src: lead,
                        dst,
                        phase: Phase::CollectorDown,
                        class: Some(c + 1),
                        slot: Some(j),
                        payload: Payload::Model(lead_final.sources[c].models[j].clone()),
                    },
                )?;
            }
        }
    }

    let d = lead_final.space().raw_dim;
    let placeholder = Arc::new(LinearModel::zeros(FeatureSpace::raw(d), ModelKind::Base));
    let mut finals = Vec::with_capacity(s);
    for l in 0..s {
        if let Some(f) = agg_finals.remove(&l) {
            finals.push(f);
            continue;
        }
        let msgs = gather(bus, l, Phase::CollectorDown, k + forwarded)?;
        let mut models: Vec<Option<Arc<LinearModel>>> = vec![None; k];
        let mut slots: Vec<Vec<Arc<LinearModel>>> = vec![vec![placeholder.clone(); s]; k];
        for m in msgs {
            let c = m
                .class
                .ok_or_else(|| Error::protocol("collector_down", "model without class tag"))?;
            let model = m.payload.model().cloned().ok_or_else(|| {
                Error::protocol("collector_down", "raw samples on a model exchange")
            })?;
            match m.slot {
                Some(j) => slots[c - 1][j] = model,
                None => models[c - 1] = Some(model),
            }
        }
        let models = models
            .into_iter()
            .map(|m| {
                m.ok_or_else(|| {
                    Error::protocol("collector_down", format!("node {l} missing a final model"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sets = slots
            .into_iter()
            .map(SourceSet::new)
            .collect::<Result<Vec<_>>>()?;
        finals.push(OvaClassifier::new(models, sets, clip)?);
    }

    Ok(LimitedOutcome {
        aggregators: aggs,
        base: base
            .into_iter()
            .map(|m| OvaClassifier::new(m, Vec::new(), None))
            .collect::<Result<_>>()?,
        finals,
        ledger: bus.ledger(),
    })
}
