use rand::Rng;
use super::buffers::{sample_buffers, BufferState};
use super::channel::{sample_aged_pair, sample_channel, ChannelTensor};
use super::config::{ChannelConfig, EnvironmentConfig};
use super::geometry::{sample_geometry, UserPosition};
use super::impairments::apply_estimation_noise;
use crate::error::Result;

/// Lower bound on the initial average rate, bits/s.
pub const AVG_RATE_FLOOR_BPS: f64 = 1e3;

/// Frozen per-episode world.
///
/// `h_est` is what the transmitter knows (precoding, link adaptation,
/// features); `h_true` decides what is actually delivered.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentState {
    pub positions: Vec<UserPosition>,
    pub h_true: ChannelTensor,
    pub h_est: ChannelTensor,
    pub buffers: BufferState,
    pub avg_rates: Vec<f64>,
    pub phy: ChannelConfig,
    /// Receiver noise variance; channels are scaled so that this is 1.
    pub noise_variance: f64,
    /// Buffer size treated as "full"; never truncates a transport block.
    pub full_buffer_bits: u64,
}

impl EnvironmentState {
    pub fn n_user(&self) -> usize {
        self.h_true.n_user
    }

    pub fn n_subband(&self) -> usize {
        self.h_true.n_subband
    }
}

/// `R̄_k = max(10³, C_k / N_user)` where `C_k` is the single-user full-band
/// Shannon rate at the user's wideband SNR (mean per-subband `‖H_{k,j}‖²/σ²`).
pub fn init_average_rates(h_true: &ChannelTensor, phy: &ChannelConfig, noise_variance: f64) -> Vec<f64> {
    let n_user = h_true.n_user;
    let symbols = (h_true.n_subband * phy.symbols_per_subband()) as f64;
    (0..n_user)
        .map(|k| {
            let snr = h_true.user_norm_sqr(k) / (h_true.n_subband as f64 * noise_variance);
            let capacity = symbols * (1.0 + snr).log2() / phy.tti_s;
            (capacity / n_user as f64).max(AVG_RATE_FLOOR_BPS)
        })
        .collect()
}

/// geometry → channel (aged pair if a speed is configured) → estimation noise
/// (if configured) → buffers → average rates, all from `rng` in that order.
pub fn sample_environment<R: Rng + ?Sized>(
    cfg: &EnvironmentConfig,
    full_buffer_bits: u64,
    rng: &mut R,
) -> Result<EnvironmentState> {
    cfg.validate()?;
    let positions = sample_geometry(&cfg.geometry, cfg.n_user, rng);
    let (h_snapshot, h_true) = match cfg.impairments.user_speed_mps {
        Some(_) => sample_aged_pair(&positions, &cfg.geometry, &cfg.channel, &cfg.impairments, rng),
        None => {
            let h = sample_channel(&positions, &cfg.geometry, &cfg.channel, rng);
            (h.clone(), h)
        }
    };
    let h_est = match cfg.impairments.snr_ce_db {
        Some(snr) => apply_estimation_noise(&h_snapshot, snr, rng),
        None => h_snapshot,
    };
    let buffers = sample_buffers(&cfg.impairments, cfg.n_user, full_buffer_bits, rng);
    let noise_variance = 1.0;
    let avg_rates = init_average_rates(&h_true, &cfg.channel, noise_variance);
    Ok(EnvironmentState {
        positions,
        h_true,
        h_est,
        buffers,
        avg_rates,
        phy: cfg.channel.clone(),
        noise_variance,
        full_buffer_bits,
    })
}
