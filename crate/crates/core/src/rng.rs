//! Seed derivation for independent, order-free random streams.
//!
//! Every randomized stage draws from its own ChaCha stream whose seed is a
//! mix of the master seed, a stage tag and an index. Parallel workers can
//! therefore run in any order without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the pipeline stages.
pub mod stage {
    pub const SAMPLE: u64 = 1;
    pub const SAMPLE_BALLS: u64 = 2;
    pub const KEY_BALLS: u64 = 3;
    pub const FULL_BALLS: u64 = 4;
    pub const SYNTHETIC: u64 = 5;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stage: u64, index: u64) -> u64 {
    mix64(mix64(master ^ mix64(stage)).wrapping_add(index))
}

pub fn stream(master: u64, stage: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stage, index))
}
