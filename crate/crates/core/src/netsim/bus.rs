use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{LedgerEntry, OverheadLedger};
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::learn::LinearModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Step1,
    Step3,
    CollectorUp,
    CollectorDown,
    DynG,
    /// Raw training data shipped to a central site (Cloud baseline only).
    CloudUpload,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::Step1,
        Phase::Step3,
        Phase::CollectorUp,
        Phase::CollectorDown,
        Phase::DynG,
        Phase::CloudUpload,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Step1 => "step1",
            Phase::Step3 => "step3",
            Phase::CollectorUp => "collector_up",
            Phase::CollectorDown => "collector_down",
            Phase::DynG => "dyn_G",
            Phase::CloudUpload => "cloud_upload",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    Model(Arc<LinearModel>),
    Samples(Arc<Vec<Sample>>),
}

impl Payload {
    /// Values that go on the wire: non-null coefficients for a model,
    /// every feature value for raw samples.
    pub fn non_null_count(&self) -> u64 {
        match self {
            Payload::Model(m) => m.non_null_count() as u64,
            Payload::Samples(s) => s.iter().map(|x| x.features.len() as u64).sum(),
        }
    }

    pub fn is_model(&self) -> bool {
        matches!(self, Payload::Model(_))
    }

    pub fn model(&self) -> Option<&Arc<LinearModel>> {
        match self {
            Payload::Model(m) => Some(m),
            Payload::Samples(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Message {
    pub src: usize,
    pub dst: usize,
    pub phase: Phase,
    /// Class (1-based) the payload belongs to, if any.
    pub class: Option<usize>,
    /// Position in the receiver's source set, for source models forwarded
    /// alongside a transfer model.
    pub slot: Option<usize>,
    pub payload: Payload,
}

/// Byte accounting for payloads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Encoding {
    pub bytes_per_coeff: u64,
    /// Charge `index_bytes` per value for models that are not fully dense.
    pub indexed: bool,
    pub index_bytes: u64,
}

impl Default for Encoding {
    fn default() -> Self {
        Self {
            bytes_per_coeff: 8,
            indexed: false,
            index_bytes: 4,
        }
    }
}

impl Encoding {
    pub fn bytes(&self, payload: &Payload) -> u64 {
        let n = payload.non_null_count();
        let index = match payload {
            Payload::Model(m) if self.indexed && m.non_null_count() < m.coefficients.len() => {
                n * self.index_bytes
            }
            _ => 0,
        };
        n * self.bytes_per_coeff + index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Receipt {
    /// Position of the message in the ledger.
    pub sequence: usize,
    pub count: u64,
    pub bytes: u64,
}

#[derive(Default)]
struct State {
    mailboxes: BTreeMap<(usize, usize), VecDeque<Message>>,
    offline: BTreeSet<usize>,
    ledger: OverheadLedger,
}

/// Point-to-point bus between `nodes` endpoints `0..nodes`. Delivery is
/// in order per `(src, dst)` pair; every send is metered atomically.
pub struct Bus {
    nodes: usize,
    encoding: Encoding,
    state: Mutex<State>,
}

impl Bus {
    pub fn new(nodes: usize, encoding: Encoding) -> Self {
        Self {
            nodes,
            encoding,
            state: Mutex::new(State::default()),
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn set_offline(&self, node: usize, offline: bool) {
        let mut st = self.state.lock().expect("bus lock");
        if offline {
            st.offline.insert(node);
        } else {
            st.offline.remove(&node);
        }
    }

    pub fn send(&self, msg: Message) -> Result<Receipt> {
        if msg.src == msg.dst {
            return Err(Error::Routing(format!(
                "node {} sending to itself",
                msg.src
            )));
        }
        for id in [msg.src, msg.dst] {
            if id >= self.nodes {
                return Err(Error::Routing(format!(
                    "unknown node {id} (bus has {})",
                    self.nodes
                )));
            }
        }
        let count = msg.payload.non_null_count();
        let bytes = self.encoding.bytes(&msg.payload);
        let mut st = self.state.lock().expect("bus lock");
        if st.offline.contains(&msg.dst) {
            return Err(Error::Routing(format!("node {} is offline", msg.dst)));
        }
        let sequence = st.ledger.entries.len();
        st.ledger.entries.push(LedgerEntry {
            phase: msg.phase,
            src: msg.src,
            dst: msg.dst,
            class: msg.class,
            count,
            bytes,
            model_payload: msg.payload.is_model(),
        });
        st.mailboxes
            .entry((msg.src, msg.dst))
            .or_default()
            .push_back(msg);
        Ok(Receipt {
            sequence,
            count,
            bytes,
        })
    }

    /// Removes and returns every pending message for `dst`, ordered by
    /// source id and then by send order.
    pub fn drain(&self, dst: usize) -> Vec<Message> {
        let mut st = self.state.lock().expect("bus lock");
        let mut out = Vec::new();
        for ((_, d), queue) in st.mailboxes.iter_mut() {
            if *d == dst {
                out.extend(queue.drain(..));
            }
        }
        out
    }

    pub fn pending(&self) -> usize {
        self.state
            .lock()
            .expect("bus lock")
            .mailboxes
            .values()
            .map(VecDeque::len)
            .sum()
    }

    pub fn ledger(&self) -> OverheadLedger {
        self.state.lock().expect("bus lock").ledger.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{FeatureSpace, ModelKind};

    fn dense(d: usize) -> Payload {
        let m = LinearModel::new(FeatureSpace::raw(d), ModelKind::Base, vec![0.5; d + 1]).unwrap();
        Payload::Model(Arc::new(m))
    }

    fn msg(src: usize, dst: usize, payload: Payload) -> Message {
        Message {
            src,
            dst,
            phase: Phase::Step1,
            class: Some(1),
            slot: None,
            payload,
        }
    }

    #[test]
    fn dense_and_sparse_counts() {
        let bus = Bus::new(3, Encoding::default());
        let r = bus.send(msg(0, 1, dense(324))).unwrap();
        assert_eq!((r.count, r.bytes), (325, 2600));
        let mut coef = vec![0.0; 335];
        coef.iter_mut().take(12).for_each(|c| *c = 1.0);
        let sparse =
            LinearModel::new(FeatureSpace::augmented(324, 10), ModelKind::Gtl, coef).unwrap();
        let r = bus
            .send(msg(1, 2, Payload::Model(Arc::new(sparse.clone()))))
            .unwrap();
        assert_eq!(r.count, 12);
        let indexed = Bus::new(
            3,
            Encoding {
                indexed: true,
                ..Default::default()
            },
        );
        assert_eq!(
            indexed
                .send(msg(1, 2, Payload::Model(Arc::new(sparse))))
                .unwrap()
                .bytes,
            12 * 12
        );
        assert_eq!(indexed.send(msg(1, 2, dense(3))).unwrap().bytes, 32);
    }

    #[test]
    fn routing_errors() {
        let bus = Bus::new(2, Encoding::default());
        assert!(matches!(
            bus.send(msg(0, 0, dense(1))),
            Err(Error::Routing(_))
        ));
        assert!(matches!(
            bus.send(msg(0, 5, dense(1))),
            Err(Error::Routing(_))
        ));
        bus.set_offline(1, true);
        assert!(matches!(
            bus.send(msg(0, 1, dense(1))),
            Err(Error::Routing(_))
        ));
        assert_eq!(bus.ledger().entries.len(), 0);
    }

    #[test]
    fn in_order_delivery() {
        let bus = Bus::new(3, Encoding::default());
        for d in [1, 2, 3] {
            bus.send(msg(2, 0, dense(d))).unwrap();
        }
        bus.send(msg(1, 0, dense(9))).unwrap();
        let got: Vec<(usize, usize)> = bus
            .drain(0)
            .iter()
            .map(|m| (m.src, m.payload.model().unwrap().space.raw_dim))
            .collect();
        assert_eq!(got, vec![(1, 9), (2, 1), (2, 2), (2, 3)]);
        assert_eq!(bus.pending(), 0);
    }

    #[test]
    fn sample_payloads_are_flagged() {
        let bus = Bus::new(2, Encoding::default());
        let data = Arc::new(vec![Sample::new(vec![1.0, 2.0], 1); 3]);
        let r = bus.send(msg(0, 1, Payload::Samples(data))).unwrap();
        assert_eq!(r.count, 6);
        assert_eq!(bus.ledger().sample_messages(), 1);
    }
}
