//! Seed expansion shared by every randomized step.
//!
//! A single user seed is expanded into independent per-task seeds with
//! `derive(seed, tag)`, where `tag` names the task (for example
//! `"corpus/case/17"` or `"tune/split"`). The mapping hashes the tag with
//! FNV-1a and mixes it with the seed through two SplitMix64 rounds, so the
//! result depends only on `(seed, tag)` and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives the seed for task `tag` from the root seed.
pub fn derive(seed: u64, tag: &str) -> u64 {
    splitmix64(splitmix64(seed) ^ fnv1a(tag.as_bytes()))
}

/// Derives the seed for the `index`-th member of a task family.
pub fn derive_indexed(seed: u64, tag: &str, index: u64) -> u64 {
    splitmix64(derive(seed, tag) ^ splitmix64(index))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
