//! Geometric multipath channel.
//!
//! Each user sees `n_clusters` plane-wave rays leaving a half-wavelength
//! uniform linear array. A ray carries a departure angle (around the user's
//! line-of-sight azimuth), an arrival angle at the user, a delay drawn from an
//! exponential power-delay profile, a uniform phase, and a Doppler angle
//! relative to the user's direction of travel. The per-subband frequency
//! response is the DFT of the delay taps evaluated at each subband centre.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::config::{ChannelConfig, GeometryConfig, ImpairmentConfig, SPEED_OF_LIGHT};
use super::geometry::UserPosition;

/// Complex channel indexed `[user][subband][rx][tx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub n_user: usize,
    pub n_subband: usize,
    pub n_rx: usize,
    pub n_tx: usize,
    pub data: Vec<Complex64>,
}

impl ChannelTensor {
    pub fn zeros(n_user: usize, n_subband: usize, n_rx: usize, n_tx: usize) -> Self {
        Self {
            n_user,
            n_subband,
            n_rx,
            n_tx,
            data: vec![Complex64::new(0.0, 0.0); n_user * n_subband * n_rx * n_tx],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n_user, self.n_subband, self.n_rx, self.n_tx)
    }

    fn block(&self) -> usize {
        self.n_rx * self.n_tx
    }

    /// Row-major `n_rx × n_tx` matrix `H_{k,j}`.
    #[inline]
    pub fn matrix(&self, user: usize, subband: usize) -> &[Complex64] {
        let b = self.block();
        let off = (user * self.n_subband + subband) * b;
        &self.data[off..off + b]
    }

    #[inline]
    pub fn matrix_mut(&mut self, user: usize, subband: usize) -> &mut [Complex64] {
        let b = self.block();
        let off = (user * self.n_subband + subband) * b;
        &mut self.data[off..off + b]
    }

    /// All coefficients of one user, `[subband][rx][tx]`.
    pub fn user(&self, user: usize) -> &[Complex64] {
        let len = self.n_subband * self.block();
        &self.data[user * len..(user + 1) * len]
    }

    pub fn user_mut(&mut self, user: usize) -> &mut [Complex64] {
        let len = self.n_subband * self.block();
        &mut self.data[user * len..(user + 1) * len]
    }

    /// `‖H_k‖²` over every subband and antenna pair.
    pub fn user_norm_sqr(&self, user: usize) -> f64 {
        self.user(user).iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn subband_norm_sqr(&self, user: usize, subband: usize) -> f64 {
        self.matrix(user, subband).iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub departure_rad: f64,
    pub arrival_rad: f64,
    pub doppler_angle_rad: f64,
    pub delay_s: f64,
    pub power: f64,
    pub phase_rad: f64,
}

/// One drawn multipath realisation for every user; snapshots at different
/// times share it and differ only through the Doppler phase rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipath {
    pub rays: Vec<Vec<Ray>>,
    /// Linear `P_tx · gain / N` per PRB, i.e. mean per-coefficient SNR.
    pub snr_scale: Vec<f64>,
}

fn path_loss_db(pos: &UserPosition, geometry: &GeometryConfig, channel: &ChannelConfig) -> f64 {
    let pl = channel.scenario.path_loss();
    let fspl_1m = 20.0 * (4.0 * PI / channel.wavelength_m()).log10();
    fspl_1m + 10.0 * pl.exponent * pos.distance_3d(geometry).log10() + pl.clutter_db
}

/// Draws rays and large-scale gain. Per user: shadowing, then for each ray
/// departure offset, arrival angle, Doppler angle, delay, phase.
pub fn sample_multipath<R: Rng + ?Sized>(
    positions: &[UserPosition],
    geometry: &GeometryConfig,
    channel: &ChannelConfig,
    rng: &mut R,
) -> Multipath {
    let pl = channel.scenario.path_loss();
    let spread = channel.angular_spread().to_radians();
    let ds = channel.delay_spread();
    let shadow = Normal::new(0.0, pl.shadow_std_db).expect("finite shadow std");
    let angle_noise = Normal::new(0.0, spread).expect("finite angular spread");
    let delay_dist = (ds > 0.0).then(|| Exp::new(1.0 / ds).expect("positive delay spread"));
    let noise_w = channel.noise_power_w_per_prb();

    let mut rays = Vec::with_capacity(positions.len());
    let mut snr_scale = Vec::with_capacity(positions.len());
    for pos in positions {
        let loss_db = path_loss_db(pos, geometry, channel) + shadow.sample(rng);
        let gain = 10f64.powf(-loss_db / 10.0);
        snr_scale.push(channel.tx_power_w_per_prb * gain / noise_w);

        let mut user_rays: Vec<Ray> = (0..channel.n_clusters)
            .map(|_| {
                let departure_rad = pos.azimuth_rad + angle_noise.sample(rng);
                let arrival_rad = rng.random_range(-PI..PI);
                let doppler_angle_rad = rng.random_range(0.0..2.0 * PI);
                let delay_s = delay_dist.map_or(0.0, |d| d.sample(rng));
                let phase_rad = rng.random_range(0.0..2.0 * PI);
                let power = if ds > 0.0 { (-delay_s / ds).exp() } else { 1.0 };
                Ray {
                    departure_rad,
                    arrival_rad,
                    doppler_angle_rad,
                    delay_s,
                    power,
                    phase_rad,
                }
            })
            .collect();
        let total: f64 = user_rays.iter().map(|r| r.power).sum();
        user_rays.iter_mut().for_each(|r| r.power /= total);
        rays.push(user_rays);
    }
    Multipath { rays, snr_scale }
}

impl Multipath {
    /// Frequency response at time offset `t_s` for users moving at `speed_mps`.
    pub fn realize(&self, channel: &ChannelConfig, speed_mps: f64, t_s: f64) -> ChannelTensor {
        let n_sub = channel.n_subband();
        let (n_rx, n_tx) = (channel.n_rx, channel.n_tx);
        let mut h = ChannelTensor::zeros(self.rays.len(), n_sub, n_rx, n_tx);
        let f_doppler = speed_mps * channel.carrier_freq_hz / SPEED_OF_LIGHT;
        let sb_bw = channel.subband_bandwidth_hz();
        let centre = |j: usize| (j as f64 + 0.5 - n_sub as f64 / 2.0) * sb_bw;

        for (k, user_rays) in self.rays.iter().enumerate() {
            let amp = self.snr_scale[k].sqrt();
            for ray in user_rays {
                let phase = ray.phase_rad + 2.0 * PI * f_doppler * ray.doppler_angle_rad.cos() * t_s;
                let base = Complex64::from_polar(amp * ray.power.sqrt(), phase);
                let (s_dep, s_arr) = (ray.departure_rad.sin(), ray.arrival_rad.sin());
                for j in 0..n_sub {
                    let tap = base * Complex64::from_polar(1.0, -2.0 * PI * centre(j) * ray.delay_s);
                    let m = h.matrix_mut(k, j);
                    for r in 0..n_rx {
                        let rx = Complex64::from_polar(1.0, PI * r as f64 * s_arr);
                        for t in 0..n_tx {
                            // H = Σ α · b(arrival) · a(departure)ᴴ
                            let tx = Complex64::from_polar(1.0, -PI * t as f64 * s_dep);
                            m[r * n_tx + t] += tap * rx * tx;
                        }
                    }
                }
            }
        }
        h
    }
}

/// One channel snapshot for the given user positions.
pub fn sample_channel<R: Rng + ?Sized>(
    positions: &[UserPosition],
    geometry: &GeometryConfig,
    channel: &ChannelConfig,
    rng: &mut R,
) -> ChannelTensor {
    sample_multipath(positions, geometry, channel, rng).realize(channel, 0.0, 0.0)
}

/// Two snapshots of one realisation `aging_delay_s` apart: `(h_est, h_true)`.
pub fn sample_aged_pair<R: Rng + ?Sized>(
    positions: &[UserPosition],
    geometry: &GeometryConfig,
    channel: &ChannelConfig,
    impairments: &ImpairmentConfig,
    rng: &mut R,
) -> (ChannelTensor, ChannelTensor) {
    let mp = sample_multipath(positions, geometry, channel, rng);
    let speed = impairments.user_speed_mps.unwrap_or(0.0);
    let h_est = mp.realize(channel, speed, 0.0);
    let h_true = mp.realize(channel, speed, impairments.aging_delay_s);
    (h_est, h_true)
}
