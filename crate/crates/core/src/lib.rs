//! Distributed learning at the network edge through hypothesis transfer.
//!
//! The crate simulates two families of model-exchange procedures over
//! partitioned datasets:
//!
//! * **GTL**: every location trains local one-vs-all SVMs, broadcasts them,
//!   refines its own model with GreedyTL using the received models as
//!   sources, broadcasts the refined sparse models and aggregates them.
//! * **noHTL**: local SVMs aggregated either by a single collector
//!   (consensus mean) or by majority voting over all local models.
//!
//! Every transmission goes through [`netsim::Bus`], which meters non-null
//! coefficients per phase so that measured traffic can be reconciled with
//! the closed-form overhead formulas in [`netsim::formulas`].

pub mod data;
pub mod error;
pub mod experiment;
pub mod learn;
pub mod metrics;
pub mod multiclass;
pub mod netsim;
pub mod proto;
pub mod rng;

pub use error::{Error, Result};
