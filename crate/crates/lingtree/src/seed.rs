//! Deterministic RNG streams.
//!
//! Every randomized operation takes an explicit `u64` seed and derives a
//! [`ChaCha8Rng`] from it. Substreams for labeled work items (one language,
//! one repetition, one fold) are derived by mixing the master seed with a
//! string label and an index, so adding or removing unrelated work never
//! shifts the random numbers another item sees.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Builds the RNG used throughout the crate from a bare seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a label and index into a new seed.
///
/// FNV-1a over the label bytes, then the index bytes, starting from the
/// master seed xored into the FNV offset basis. Stable across platforms.
pub fn mix(master: u64, label: &str, index: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET ^ master;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    for b in index.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Derives a substream RNG for one labeled work item.
pub fn stream(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    rng(mix(master, label, index))
}
