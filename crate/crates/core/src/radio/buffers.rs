use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ImpairmentConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferState {
    pub n_bits: Vec<u64>,
}

/// `N_bits,k = 8·⌊b/8⌋`, `b ~ U(N_min, N_max)`, with one uniformly chosen
/// user forced to `full_sentinel_bits`. With `full_buffer` every user holds
/// the sentinel and no draws are made.
pub fn sample_buffers<R: Rng + ?Sized>(
    impairments: &ImpairmentConfig,
    n_user: usize,
    full_sentinel_bits: u64,
    rng: &mut R,
) -> BufferState {
    assert!(n_user >= 1);
    if impairments.full_buffer {
        return BufferState {
            n_bits: vec![full_sentinel_bits; n_user],
        };
    }
    let (lo, hi) = (impairments.buffer_min_bits, impairments.buffer_max_bits);
    let mut n_bits: Vec<u64> = (0..n_user)
        .map(|_| {
            let b = if hi > lo { rng.random_range(lo..hi) } else { lo };
            8 * (b / 8.0).floor() as u64
        })
        .collect();
    let forced = rng.random_range(0..n_user);
    n_bits[forced] = full_sentinel_bits;
    BufferState { n_bits }
}
