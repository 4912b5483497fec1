//! Seed plumbing. Every random draw in the crate comes from a ChaCha stream
//! keyed by a master seed plus a list of integer tags, so parallel work is
//! independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with tags into a new 64-bit seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

/// Independent generator for `(seed, tags...)`.
pub fn substream(seed: u64, tags: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
