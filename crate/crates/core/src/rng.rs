//! Seed derivation. Every random decision in the crate draws from a
//! `ChaCha8Rng` seeded from a base seed plus a tag path, so results do not
//! depend on execution order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `tags` into `base`, yielding an independent child seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn rng_for(base: u64, tags: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(base, tags))
}

/// Stable tags for the stream names used across the crate.
pub mod tag {
    pub const HOLDOUT: u64 = 1;
    pub const PARTITION: u64 = 2;
    pub const SVM: u64 = 3;
    pub const GREEDY: u64 = 4;
    pub const MALICE: u64 = 5;
    pub const SYNTH: u64 = 6;
    pub const REDISTRIBUTE: u64 = 7;
    pub const SUBSAMPLE: u64 = 8;
    pub const AGGREGATORS: u64 = 9;
    pub const DYNAMIC: u64 = 10;
}
