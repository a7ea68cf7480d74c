//! Seed derivation.
//!
//! Every random decision is drawn from a ChaCha8 stream whose seed is derived
//! from the user seed and a small tuple of indices (pass, root, repetition and
//! so on). No generator state is shared between units of work, which is what
//! makes parallel walk generation order-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags keep streams for different purposes apart.
pub mod stream {
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const WALK: u64 = 0x5741_4c4b;
    pub const INIT: u64 = 0x494e_4954;
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const GRAPH: u64 = 0x4752_4150;
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `seed` with `parts` into a single 64-bit seed.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// A generator for the stream identified by `(seed, parts)`.
pub fn derive(seed: u64, parts: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, parts))
}
