//! Seed derivation for reproducible parallel simulation.
//!
//! A work unit (replicate, grid cell, bootstrap sample) never shares a
//! generator with another one. Instead its seed is a pure function of the
//! master seed and the unit's index path, so the same unit always sees the
//! same stream no matter which thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every stochastic routine in the crate.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and an index path.
///
/// `derive_seed(s, &[a, b])` equals `derive_seed(derive_seed(s, &[a]), &[b])`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |acc, &idx| {
        mix(acc.wrapping_add(GOLDEN).wrapping_add(mix(idx.wrapping_mul(GOLDEN) ^ 0x5851_f42d_4c95_7f2d)))
    })
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for the work unit addressed by `path` under `seed`.
pub fn substream(seed: u64, path: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(seed, path))
}
