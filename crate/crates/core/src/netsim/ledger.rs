use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Phase;

/// One metered transmission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub phase: Phase,
    pub src: usize,
    pub dst: usize,
    pub class: Option<usize>,
    /// Transmitted values (non-null coefficients or raw feature values).
    pub count: u64,
    pub bytes: u64,
    pub model_payload: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTotal {
    pub messages: u64,
    pub count: u64,
    pub bytes: u64,
}

impl PhaseTotal {
    fn add(&mut self, e: &LedgerEntry) {
        self.messages += 1;
        self.count += e.count;
        self.bytes += e.bytes;
    }

    /// Mean values per message (0 for an empty phase).
    pub fn mean_count(&self) -> f64 {
        if self.messages == 0 {
            0.0
        } else {
            self.count as f64 / self.messages as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverheadLedger {
    pub entries: Vec<LedgerEntry>,
}

impl OverheadLedger {
    pub fn phase(&self, phase: Phase) -> PhaseTotal {
        let mut t = PhaseTotal::default();
        self.entries
            .iter()
            .filter(|e| e.phase == phase)
            .for_each(|e| t.add(e));
        t
    }

    /// Totals for every phase that carried traffic, in phase order.
    pub fn phases(&self) -> Vec<(Phase, PhaseTotal)> {
        Phase::ALL
            .iter()
            .map(|&p| (p, self.phase(p)))
            .filter(|(_, t)| t.messages > 0)
            .collect()
    }

    pub fn total(&self) -> PhaseTotal {
        let mut t = PhaseTotal::default();
        self.entries.iter().for_each(|e| t.add(e));
        t
    }

    /// Number of messages that carried raw samples instead of a model.
    pub fn sample_messages(&self) -> usize {
        self.entries.iter().filter(|e| !e.model_payload).count()
    }

    pub fn extend(&mut self, other: &OverheadLedger) {
        self.entries.extend(other.entries.iter().cloned());
    }

    /// Per-message rows `phase,src,dst,class,count,bytes`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "phase,src,dst,class,count,bytes")?;
        for e in &self.entries {
            let class = e.class.map(|c| c.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                e.phase, e.src, e.dst, class, e.count, e.bytes
            )?;
        }
        Ok(())
    }
}
