//! The distributed procedures. Nodes only ever exchange models through a
//! [`Bus`](crate::netsim::Bus); local training within a phase runs concurrently and every send
//! happens in node order after the phase barrier, so results and ledgers
//! do not depend on scheduling.

mod cloud;
mod dynamic;
mod exchange;
mod gtl;
mod limited;
mod malice;
mod nohtl;

pub use cloud::{run_cloud, CloudOutcome};
pub use dynamic::{flatten, run_dynamic, DynamicConfig, DynamicOutcome, DynamicPhase};
pub use gtl::{run_gtl, GtlOutcome};
pub use limited::{run_gtl_limited, LimitedOutcome};
pub use malice::{corrupt, MaliceMode, MaliceSchedule, MaliciousConfig};
pub use nohtl::{run_nohtl_mu, run_nohtl_mv, NohtlMuOutcome, NohtlMvOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{GreedyTlConfig, SvmConfig};
use crate::multiclass::{majority_vote, MarginCache, OvaClassifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Gtl,
    NohtlMu,
    NohtlMv,
    GtlLimited,
    DynGtl,
    DynNohtl,
}

/// Step-4 rule(s) evaluated for GTL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    Majority,
    Both,
}

impl Aggregation {
    pub fn mean(self) -> bool {
        matches!(self, Aggregation::Mean | Aggregation::Both)
    }

    pub fn majority(self) -> bool {
        matches!(self, Aggregation::Majority | Aggregation::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub aggregation: Aggregation,
    /// Aggregator count for limited GTL; `None` means every node.
    pub num_aggregators: Option<usize>,
    /// Pick aggregators at random instead of the lowest node ids.
    pub random_aggregators: bool,
    /// Collector node for the consensus-mean variant.
    pub collector_id: usize,
    /// Also corrupt Step-3 payloads of malicious nodes.
    pub corrupt_step3: bool,
    pub svm: SvmConfig,
    pub greedy: GreedyTlConfig,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            aggregation: Aggregation::Both,
            num_aggregators: None,
            random_aggregators: false,
            collector_id: 0,
            corrupt_step3: false,
            svm: SvmConfig::default(),
            greedy: GreedyTlConfig::default(),
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self, s: usize) -> Result<()> {
        self.svm.validate()?;
        self.greedy.validate()?;
        if self.collector_id >= s {
            return Err(Error::config(format!(
                "collector {} is not one of the {s} nodes",
                self.collector_id
            )));
        }
        if let Some(a) = self.num_aggregators {
            if a == 0 || a > s {
                return Err(Error::config(format!(
                    "num_aggregators must lie in 1..={s}, got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Majority vote over several classifiers, lowest label on ties.
#[derive(Debug, Clone)]
pub struct VoteEnsemble {
    pub members: Vec<OvaClassifier>,
}

impl VoteEnsemble {
    pub fn predict_all(&self, cache: &MarginCache<'_>) -> Result<Vec<usize>> {
        let votes: Vec<Vec<usize>> = self
            .members
            .iter()
            .map(|m| m.predict_all(cache))
            .collect::<Result<_>>()?;
        Ok((0..cache.len())
            .map(|i| {
                let row: Vec<usize> = votes.iter().map(|v| v[i]).collect();
                majority_vote(&row).expect("ensemble has members")
            })
            .collect())
    }
}
