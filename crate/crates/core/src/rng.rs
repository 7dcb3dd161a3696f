//! Deterministic random streams.
//!
//! All randomness goes through ChaCha8 seeded from a `u64`, so results are
//! reproducible across platforms and thread schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the unordered pair `{i, j}` under a global seed.
pub fn pair_seed(seed: u64, i: u64, j: u64) -> u64 {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    mix64(mix64(mix64(seed) ^ lo) ^ hi.rotate_left(32))
}
