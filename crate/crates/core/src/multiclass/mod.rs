//! One-vs-all composition of binary models, codebook decoding and the two
//! aggregation rules.

mod codebook;
mod ova;

pub use codebook::{decode, majority_vote, sign, CodeBook};
pub use ova::{consensus_mean, train_ova, MarginCache, OvaClassifier, OvaRecord};
