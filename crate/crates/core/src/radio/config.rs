use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const SUBCARRIERS_PER_PRB: usize = 12;
pub const SYMBOLS_PER_TTI: usize = 14;

/// Circular-sector cell around a base station at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub cell_radius_m: f64,
    pub sector_angle_deg: f64,
    pub min_distance_m: f64,
    pub user_height_m: f64,
    pub bs_height_m: f64,
    pub bs_azimuth_deg: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 500.0,
            sector_angle_deg: 65.0,
            min_distance_m: 35.0,
            user_height_m: 1.5,
            bs_height_m: 25.0,
            bs_azimuth_deg: 0.0,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_distance_m > 0.0 && self.cell_radius_m >= self.min_distance_m) {
            return Err(Error::config(format!(
                "geometry: need cell_radius_m ({}) >= min_distance_m ({}) > 0",
                self.cell_radius_m, self.min_distance_m
            )));
        }
        if !(self.sector_angle_deg > 0.0 && self.sector_angle_deg <= 360.0) {
            return Err(Error::config("geometry: sector_angle_deg must be in (0, 360]"));
        }
        if !(self.user_height_m.is_finite() && self.bs_height_m.is_finite()) {
            return Err(Error::config("geometry: heights must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioTag {
    #[serde(rename = "UMa")]
    UMa,
    #[serde(rename = "UMi")]
    UMi,
}

/// Log-distance path loss `FSPL(1 m) + 10·n·log10(d) + clutter + N(0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    pub exponent: f64,
    pub clutter_db: f64,
    pub shadow_std_db: f64,
}

impl ScenarioTag {
    pub fn path_loss(self) -> PathLossParams {
        match self {
            ScenarioTag::UMa => PathLossParams {
                exponent: 2.2,
                clutter_db: 35.0,
                shadow_std_db: 4.0,
            },
            ScenarioTag::UMi => PathLossParams {
                exponent: 2.0,
                clutter_db: 38.0,
                shadow_std_db: 7.0,
            },
        }
    }

    pub fn default_angular_spread_deg(self) -> f64 {
        match self {
            ScenarioTag::UMa => 10.0,
            ScenarioTag::UMi => 25.0,
        }
    }

    pub fn default_delay_spread_s(self) -> f64 {
        match self {
            ScenarioTag::UMa => 300e-9,
            ScenarioTag::UMi => 100e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub carrier_freq_hz: f64,
    pub n_prb: usize,
    pub prb_per_subband: usize,
    pub prb_bandwidth_hz: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub tx_power_w_per_prb: f64,
    pub noise_power_dbm_per_prb: f64,
    pub tti_s: f64,
    pub scenario: ScenarioTag,
    pub n_clusters: usize,
    /// Defaults to the scenario's value when absent.
    pub angular_spread_deg: Option<f64>,
    /// Defaults to the scenario's value when absent.
    pub delay_spread_s: Option<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 3.5e9,
            n_prb: 40,
            prb_per_subband: 4,
            prb_bandwidth_hz: 200e3,
            n_tx: 2,
            n_rx: 1,
            tx_power_w_per_prb: 0.8,
            noise_power_dbm_per_prb: -112.5,
            tti_s: 1e-3,
            scenario: ScenarioTag::UMa,
            n_clusters: 12,
            angular_spread_deg: None,
            delay_spread_s: None,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prb_per_subband == 0 || self.n_prb == 0 || self.n_prb % self.prb_per_subband != 0 {
            return Err(Error::config(format!(
                "channel: n_prb ({}) must be a positive multiple of prb_per_subband ({})",
                self.n_prb, self.prb_per_subband
            )));
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::config("channel: n_tx and n_rx must be >= 1"));
        }
        if self.n_clusters == 0 {
            return Err(Error::config("channel: n_clusters must be >= 1"));
        }
        if !(self.carrier_freq_hz > 0.0 && self.tx_power_w_per_prb > 0.0 && self.tti_s > 0.0) {
            return Err(Error::config(
                "channel: carrier frequency, transmit power and TTI must be positive",
            ));
        }
        if self.angular_spread() < 0.0 || self.delay_spread() < 0.0 {
            return Err(Error::config("channel: spreads must be non-negative"));
        }
        Ok(())
    }

    pub fn n_subband(&self) -> usize {
        self.n_prb / self.prb_per_subband
    }

    pub fn subband_bandwidth_hz(&self) -> f64 {
        self.prb_per_subband as f64 * self.prb_bandwidth_hz
    }

    /// Resource elements per subband per TTI.
    pub fn symbols_per_subband(&self) -> usize {
        self.prb_per_subband * SUBCARRIERS_PER_PRB * SYMBOLS_PER_TTI
    }

    /// Angular spread in degrees after scenario defaulting.
    pub fn angular_spread(&self) -> f64 {
        self.angular_spread_deg
            .unwrap_or_else(|| self.scenario.default_angular_spread_deg())
    }

    pub fn delay_spread(&self) -> f64 {
        self.delay_spread_s
            .unwrap_or_else(|| self.scenario.default_delay_spread_s())
    }

    pub fn noise_power_w_per_prb(&self) -> f64 {
        10f64.powf((self.noise_power_dbm_per_prb - 30.0) / 10.0)
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }
}

/// CSI impairments and traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentConfig {
    /// Channel-estimate SNR in dB; absent means perfect CSI.
    pub snr_ce_db: Option<f64>,
    pub aging_delay_s: f64,
    /// User speed for channel aging; absent disables aging.
    pub user_speed_mps: Option<f64>,
    pub buffer_min_bits: f64,
    pub buffer_max_bits: f64,
    pub full_buffer: bool,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self {
            snr_ce_db: None,
            aging_delay_s: 0.01,
            user_speed_mps: None,
            buffer_min_bits: 400.0,
            buffer_max_bits: 6000.0,
            full_buffer: true,
        }
    }
}

impl ImpairmentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.snr_ce_db {
            if s.is_nan() {
                return Err(Error::config("impairments: snr_ce_db is NaN"));
            }
        }
        if !(self.aging_delay_s >= 0.0) {
            return Err(Error::config("impairments: aging_delay_s must be >= 0"));
        }
        if let Some(v) = self.user_speed_mps {
            if !(v >= 0.0) {
                return Err(Error::config("impairments: user_speed_mps must be >= 0"));
            }
        }
        if !(self.buffer_min_bits >= 0.0 && self.buffer_min_bits <= self.buffer_max_bits) {
            return Err(Error::config(
                "impairments: need 0 <= buffer_min_bits <= buffer_max_bits",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub n_user: usize,
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub impairments: ImpairmentConfig,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            n_user: 4,
            geometry: GeometryConfig::default(),
            channel: ChannelConfig::default(),
            impairments: ImpairmentConfig::default(),
        }
    }
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_user == 0 {
            return Err(Error::config("n_user must be >= 1"));
        }
        self.geometry.validate()?;
        self.channel.validate()?;
        self.impairments.validate()
    }
}
