//! In-memory message bus with coefficient-exact metering, and the
//! closed-form overhead formulas the meter is checked against.

mod bus;
pub mod formulas;
mod ledger;
mod reconcile;

pub use bus::{Bus, Encoding, Message, Payload, Phase, Receipt};
pub use formulas::{GainBound, GtlOverhead, NohtlOverhead, OverheadPrediction};
pub use ledger::{LedgerEntry, OverheadLedger, PhaseTotal};
pub use reconcile::{reconcile, Procedure, Reconciliation, ReconciliationRow};
