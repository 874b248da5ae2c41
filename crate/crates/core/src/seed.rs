//! Seed derivation.
//!
//! Streams are split with SplitMix64: `split(seed, k)` applies the SplitMix64
//! finalizer to `seed + k * GAMMA`. The finalizer is a bijection on `u64` and
//! `GAMMA` is odd, so for a fixed parent seed, distinct `k` give distinct child
//! seeds. Every child seed then drives its own ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in harness output metadata.
pub const PRNG_NAME: &str = "splitmix64-split+chacha8 (rand_chacha 0.3)";

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn split(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
