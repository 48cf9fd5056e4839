//! Deterministic seed derivation for parallel trials.
//!
//! Every trial owns a generator derived from `(master_seed, trial_index)`
//! alone, so results are reproducible regardless of how trials are
//! scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 mixing step. Spreads correlated inputs (e.g. consecutive
/// trial indices) over the full 64-bit space.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one trial: `ChaCha8` seeded with
/// `splitmix64(master_seed ^ trial_index)`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ trial_index))
}
