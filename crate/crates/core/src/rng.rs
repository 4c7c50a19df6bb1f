//! Seeded, platform-independent randomness.
//!
//! Every random draw in the crate goes through [`SplitMix64`] so that a seed
//! fully determines sampling, initialization, shuffling and dropout.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Mixes a base seed with a sequence of discriminators (fold, epoch, ...).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = FnvHasher::default();
    h.write_u64(base);
    for p in parts {
        h.write_u64(*p);
    }
    finalize(h.finish())
}

/// Stable 64-bit hash of a string key, used to give documents their own streams.
pub fn hash_str(s: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(s.as_bytes());
    finalize(h.finish())
}

// splitmix64 output mix
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
