//! Deterministic random streams.
//!
//! Every stochastic component draws from a [`SimRng`] derived from a base
//! seed and a list of integer tags (purpose, iteration, environment index...).
//! Two streams with different tag paths are statistically independent, and
//! the same path always reproduces the same stream, regardless of how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Tags used to separate the top-level streams of an experiment.
pub mod tag {
    pub const NETWORK_INIT: u64 = 1;
    pub const TRAIN_ENV: u64 = 2;
    pub const TRAIN_SEARCH: u64 = 3;
    pub const TRAIN_SHUFFLE: u64 = 4;
    pub const EVAL_ENV: u64 = 5;
    pub const HOLDOUT_ENV: u64 = 6;
    pub const ORACLE_ENV: u64 = 7;
    pub const SELFCHECK: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a tag path into a new 64-bit seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Builds the generator for `base` + `path`.
pub fn stream(base: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(base, path))
}
