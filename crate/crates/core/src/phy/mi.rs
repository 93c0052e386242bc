//! Parametric mutual-information and BLEP curves.
//!
//! Per-resource MI for an MCS with modulation order `Q` and gap `Γ_Q` is
//! `min(Q, log2(1 + sinr/Γ_Q))`. Given the mean MI over an allocation, the
//! block error probability is the logistic
//! `1 / (1 + exp(slope · (mi − threshold)))` with threshold equal to the
//! transport block's coded bits per resource element plus a fixed margin.

use serde::{Deserialize, Serialize};

use super::tbs::TbsTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiBlepConfig {
    pub gap_db_qpsk: f64,
    pub gap_db_16qam: f64,
    pub gap_db_64qam: f64,
    /// Logistic slope per bit of MI deficit.
    pub blep_slope: f64,
    pub threshold_margin_bits: f64,
}

impl Default for MiBlepConfig {
    fn default() -> Self {
        Self {
            gap_db_qpsk: 1.0,
            gap_db_16qam: 1.5,
            gap_db_64qam: 2.0,
            blep_slope: 20.0,
            threshold_margin_bits: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiBlepModel {
    pub config: MiBlepConfig,
    gaps: [f64; 3],
}

impl MiBlepModel {
    pub fn new(config: MiBlepConfig) -> Self {
        let lin = |db: f64| 10f64.powf(db / 10.0);
        let gaps = [
            lin(config.gap_db_qpsk),
            lin(config.gap_db_16qam),
            lin(config.gap_db_64qam),
        ];
        Self { config, gaps }
    }

    fn gap(&self, order: u32) -> f64 {
        match order {
            2 => self.gaps[0],
            4 => self.gaps[1],
            _ => self.gaps[2],
        }
    }

    /// MI in bits per symbol at linear `sinr` for modulation order `order`.
    pub fn mi(&self, sinr: f64, order: u32) -> f64 {
        if sinr == f64::INFINITY {
            return order as f64;
        }
        (1.0 + sinr.max(0.0) / self.gap(order)).log2().min(order as f64)
    }

    /// Threshold MI for a block of `tbs_bits` over `size` subbands.
    pub fn threshold(&self, tbs_bits: u64, size: usize, table: &TbsTable) -> f64 {
        let res = (table.symbols_per_subband() * size) as f64;
        tbs_bits as f64 / res + self.config.threshold_margin_bits
    }

    pub fn blep_from_threshold(&self, mean_mi: f64, threshold: f64) -> f64 {
        let x = self.config.blep_slope * (mean_mi - threshold);
        // 1/(1+e^x), split to avoid overflow
        if x >= 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        }
    }
}

impl Default for MiBlepModel {
    fn default() -> Self {
        Self::new(MiBlepConfig::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mi_anchors() {
        let m = MiBlepModel::default();
        for q in [2, 4, 6] {
            assert_eq!(m.mi(0.0, q), 0.0);
            assert_eq!(m.mi(f64::INFINITY, q), q as f64);
            assert_eq!(m.mi(1e12, q), q as f64);
        }
    }

    #[test]
    fn mi_is_nondecreasing() {
        let m = MiBlepModel::default();
        let mut prev = 0.0;
        for i in 0..2000 {
            let s = 10f64.powf(i as f64 / 100.0 - 5.0);
            let v = m.mi(s, 4);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn logistic_midpoint_and_tail() {
        let m = MiBlepModel::default();
        assert!((m.blep_from_threshold(2.0, 2.0) - 0.5).abs() < 1e-15);
        assert!(m.blep_from_threshold(3.0, 2.0) < 1e-3);
        assert!(m.blep_from_threshold(0.0, 2.0) > 0.999);
    }
}
