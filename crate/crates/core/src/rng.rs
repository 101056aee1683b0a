//! Seeding.
//!
//! Every random stream in the crate is a `ChaCha8` generator (`rand_chacha`),
//! seeded through `seed_from_u64`. Child streams (per repetition, per sign
//! draw, per probe batch) are keyed by a root seed and a counter mixed with
//! SplitMix64, so parallel schedules never change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide random generator.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `counter`-th child stream of `root`.
pub fn derive_seed(root: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(root) ^ counter.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Generator for the `counter`-th child stream of `root`.
pub fn child(root: u64, counter: u64) -> Rng {
    rng(derive_seed(root, counter))
}
