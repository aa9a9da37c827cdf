//! Seed derivation for independent, scheduling-order-free random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream for one `(trial, Δ index)` cell under a base seed.
pub fn derive_seed(seed: u64, trial: u64, delta_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ delta_index.rotate_left(32))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
