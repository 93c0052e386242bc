use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::channel::ChannelTensor;

/// `σ²_CE = ‖H_k‖² / SNR_CE` for every user, with `‖H_k‖²` taken over the
/// user's full channel (all subbands and antenna pairs).
pub fn estimation_noise_variance(h: &ChannelTensor, snr_ce_db: f64) -> Vec<f64> {
    let inv_snr = 10f64.powf(-snr_ce_db / 10.0);
    (0..h.n_user).map(|k| h.user_norm_sqr(k) * inv_snr).collect()
}

/// Returns `Ĥ = H + N` with `E‖N_k‖² = σ²_CE,k`, spread evenly and i.i.d.
/// over the user's coefficients, so `‖H_k‖² / E‖N_k‖² = SNR_CE`.
///
/// `snr_ce_db = +∞` yields `Ĥ = H` exactly. Draw order: user-major, then the
/// real and imaginary part of each coefficient.
pub fn apply_estimation_noise<R: Rng + ?Sized>(
    h: &ChannelTensor,
    snr_ce_db: f64,
    rng: &mut R,
) -> ChannelTensor {
    let var = estimation_noise_variance(h, snr_ce_db);
    let mut out = h.clone();
    if snr_ce_db == f64::INFINITY {
        return out;
    }
    let n_coeff = (h.n_subband * h.n_rx * h.n_tx) as f64;
    for (k, &v) in var.iter().enumerate() {
        let std = (v / n_coeff / 2.0).sqrt();
        for c in out.user_mut(k) {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c.re += std * re;
            c.im += std * im;
        }
    }
    out
}
