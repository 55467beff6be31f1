//! Seeded random streams derived from structured coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Mixes a global seed with labelled coordinates into a 64-bit seed.
///
/// The mixing is a SHA-256 over the seed and each part, separated so that
/// `("ab", "c")` and `("a", "bc")` differ. Stable across platforms and runs.
pub fn derive_seed(global: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_stream(global: u64, parts: &[&str]) -> StreamRng {
    stream(derive_seed(global, parts))
}
