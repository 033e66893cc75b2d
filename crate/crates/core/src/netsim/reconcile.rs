use serde::{Deserialize, Serialize};

use super::formulas::{
    all_to_all, overhead_bound, overhead_cloud, overhead_g, predict_overhead_nohtl,
};
use super::{OverheadLedger, Phase};

/// Communication pattern that produced a ledger, with the parameters the
/// formulas need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "procedure", rename_all = "snake_case")]
pub enum Procedure {
    Gtl {
        s: usize,
        k: usize,
    },
    NohtlMu {
        s: usize,
        k: usize,
    },
    NohtlMv {
        s: usize,
        k: usize,
    },
    GtlLimited {
        s: usize,
        k: usize,
        aggregators: usize,
    },
    /// One dynamic phase with `s` newcomers; `initial` when no stored
    /// model existed yet.
    DynGtl {
        s: usize,
        k: usize,
        initial: bool,
    },
    DynNohtl {
        s: usize,
        k: usize,
        initial: bool,
    },
    Cloud {
        n: usize,
        dc: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationRow {
    pub quantity: String,
    pub metered: f64,
    pub predicted: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub procedure: Procedure,
    /// Mean non-null count of a base-model payload.
    pub d0: f64,
    /// Mean non-null count of a GreedyTL payload (0 when none were sent).
    pub d1: f64,
    pub rows: Vec<ReconciliationRow>,
    /// `2ks²d0` for GTL runs.
    pub bound: Option<f64>,
    pub total: f64,
}

impl Reconciliation {
    pub fn row(&self, quantity: &str) -> Option<&ReconciliationRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    /// True when every predicted row matches its meter exactly.
    pub fn exact(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.residual.is_none_or(|v| v == 0.0))
    }
}

fn row(quantity: &str, metered: u64, predicted: Option<f64>) -> ReconciliationRow {
    let metered = metered as f64;
    ReconciliationRow {
        quantity: quantity.to_string(),
        metered,
        predicted,
        residual: predicted.map(|p| metered - p),
    }
}

/// Compares metered traffic with the formulas evaluated at the measured
/// mean payload sizes. Dense payloads reconcile exactly; sparse GreedyTL
/// payloads reconcile through their mean, and any residual is reported.
pub fn reconcile(ledger: &OverheadLedger, procedure: Procedure) -> Reconciliation {
    let step1 = ledger.phase(Phase::Step1);
    let step3 = ledger.phase(Phase::Step3);
    let up = ledger.phase(Phase::CollectorUp);
    let down = ledger.phase(Phase::CollectorDown);
    let dyn_g = ledger.phase(Phase::DynG);
    let total = ledger.total().count as f64;
    let mut rows = Vec::new();
    let mut bound = None;
    let (d0, d1) = match procedure {
        Procedure::Gtl { s, k } | Procedure::DynGtl { s, k, .. } => {
            let (d0, d1) = (step1.mean_count(), step3.mean_count());
            rows.push(row("oh0", step1.count, Some(all_to_all(s, k, d0))));
            rows.push(row("oh1", step3.count, Some(all_to_all(s, k, d1))));
            if let Procedure::DynGtl { initial, .. } = procedure {
                let dg = dyn_g.mean_count();
                let predicted = if initial {
                    (k as f64) * dg
                } else {
                    overhead_g(s, k, dg)
                };
                rows.push(row("oh_g", dyn_g.count, Some(predicted)));
            } else {
                bound = Some(overhead_bound(s, k, d0));
            }
            (d0, d1)
        }
        Procedure::NohtlMu { s, k } => {
            let d0 = up.mean_count();
            rows.push(row(
                "oh_mu",
                up.count + down.count,
                Some(predict_overhead_nohtl(s, k, d0).mu),
            ));
            (d0, 0.0)
        }
        Procedure::NohtlMv { s, k } => {
            let d0 = step1.mean_count();
            rows.push(row(
                "oh_mv",
                step1.count,
                Some(predict_overhead_nohtl(s, k, d0).mv),
            ));
            (d0, 0.0)
        }
        Procedure::GtlLimited {
            s,
            k,
            aggregators: a,
        } => {
            let (d0, d1) = (step1.mean_count(), step3.mean_count());
            rows.push(row("oh0", step1.count, Some((a * (s - 1) * k) as f64 * d0)));
            rows.push(row("oh1", step3.count, Some(all_to_all(a, k, d1))));
            rows.push(row("final", down.count, None));
            (d0, d1)
        }
        Procedure::DynNohtl { s, k, initial } => {
            let d0 = up.mean_count();
            rows.push(row("collector_up", up.count, Some((s * k) as f64 * d0)));
            let dg = dyn_g.mean_count();
            rows.push(row(
                "oh_g",
                dyn_g.count,
                Some(if initial { 0.0 } else { (s * k) as f64 * dg }),
            ));
            (d0, 0.0)
        }
        Procedure::Cloud { n, dc } => {
            let cloud = ledger.phase(Phase::CloudUpload);
            rows.push(row(
                "oh_cloud",
                cloud.count,
                Some(overhead_cloud(n, dc as f64)),
            ));
            (0.0, 0.0)
        }
    };
    Reconciliation {
        procedure,
        d0,
        d1,
        rows,
        bound,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::LedgerEntry;

    fn entries(phase: Phase, n: usize, count: u64) -> Vec<LedgerEntry> {
        (0..n)
            .map(|i| LedgerEntry {
                phase,
                src: i,
                dst: i + 1,
                class: None,
                count,
                bytes: count * 8,
                model_payload: true,
            })
            .collect()
    }

    #[test]
    fn empty_run_is_all_zero() {
        let r = reconcile(&OverheadLedger::default(), Procedure::Gtl { s: 3, k: 2 });
        assert_eq!(r.total, 0.0);
        assert!(r
            .rows
            .iter()
            .all(|row| row.metered == 0.0 && row.residual == Some(0.0)));
    }

    #[test]
    fn gtl_counts_reconcile() {
        let (s, k) = (4, 3);
        let mut ledger = OverheadLedger {
            entries: entries(Phase::Step1, s * (s - 1) * k, 11),
        };
        ledger
            .entries
            .extend(entries(Phase::Step3, s * (s - 1) * k, 2));
        let r = reconcile(&ledger, Procedure::Gtl { s, k });
        assert!(r.exact());
        assert_eq!(r.d0, 11.0);
        assert_eq!(r.row("oh1").unwrap().metered, 72.0);
        assert!(r.total <= r.bound.unwrap());
    }

    #[test]
    fn missing_message_shows_residual() {
        let ledger = OverheadLedger {
            entries: entries(Phase::CollectorUp, 5, 7),
        };
        let r = reconcile(&ledger, Procedure::NohtlMu { s: 4, k: 2 });
        // 6 uploads and 6 downloads expected, 5 and 0 sent
        assert_eq!(r.row("oh_mu").unwrap().residual, Some(35.0 - 84.0));
        assert!(!r.exact());
    }
}
