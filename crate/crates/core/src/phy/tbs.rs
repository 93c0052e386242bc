//! Synthetic transport-block-size table.
//!
//! MCS `i` of `n` has spectral efficiency `e_i = e_min·(e_max/e_min)^(i/(n-1))`
//! bits/symbol, and `TBS(size, i) = 8·⌊e_i · S · size / 8⌋` where `S` is the
//! number of resource elements in one subband.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TbsConfig {
    pub n_mcs: usize,
    pub min_efficiency: f64,
    pub max_efficiency: f64,
}

impl Default for TbsConfig {
    fn default() -> Self {
        Self {
            n_mcs: 16,
            min_efficiency: 0.15,
            max_efficiency: 5.5,
        }
    }
}

/// QPSK up to 1 bit/symbol, 16-QAM up to 3, 64-QAM above.
pub fn modulation_order(efficiency: f64) -> u32 {
    if efficiency <= 1.0 {
        2
    } else if efficiency <= 3.0 {
        4
    } else {
        6
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TbsTable {
    efficiencies: Vec<f64>,
    symbols_per_subband: usize,
    /// `[size - 1][mcs]`
    entries: Vec<Vec<u64>>,
}

impl TbsTable {
    pub fn synthetic(cfg: &TbsConfig, symbols_per_subband: usize, max_size: usize) -> Result<Self> {
        if cfg.n_mcs < 2 || !(cfg.min_efficiency > 0.0 && cfg.max_efficiency > cfg.min_efficiency) {
            return Err(Error::config(
                "tbs: need n_mcs >= 2 and 0 < min_efficiency < max_efficiency",
            ));
        }
        if max_size == 0 || symbols_per_subband == 0 {
            return Err(Error::config("tbs: empty table"));
        }
        let ratio = cfg.max_efficiency / cfg.min_efficiency;
        let efficiencies: Vec<f64> = (0..cfg.n_mcs)
            .map(|i| cfg.min_efficiency * ratio.powf(i as f64 / (cfg.n_mcs - 1) as f64))
            .collect();
        let entries = (1..=max_size)
            .map(|size| {
                efficiencies
                    .iter()
                    .map(|e| 8 * ((e * (symbols_per_subband * size) as f64) / 8.0).floor() as u64)
                    .collect()
            })
            .collect();
        let table = Self {
            efficiencies,
            symbols_per_subband,
            entries,
        };
        table.check_monotone()?;
        Ok(table)
    }

    fn check_monotone(&self) -> Result<()> {
        for (s, row) in self.entries.iter().enumerate() {
            if row.windows(2).any(|w| w[1] <= w[0]) || row[0] == 0 {
                return Err(Error::config(format!(
                    "tbs: row for size {} is not strictly increasing and positive",
                    s + 1
                )));
            }
        }
        Ok(())
    }

    pub fn n_mcs(&self) -> usize {
        self.efficiencies.len()
    }

    pub fn max_size(&self) -> usize {
        self.entries.len()
    }

    pub fn symbols_per_subband(&self) -> usize {
        self.symbols_per_subband
    }

    pub fn efficiency(&self, mcs: usize) -> f64 {
        self.efficiencies[mcs]
    }

    pub fn modulation_order(&self, mcs: usize) -> u32 {
        modulation_order(self.efficiencies[mcs])
    }

    /// Panics if `size` is 0 or exceeds the table.
    pub fn tbs(&self, size: usize, mcs: usize) -> u64 {
        self.entries[size - 1][mcs]
    }

    /// Largest entry anywhere in the table.
    pub fn largest(&self) -> u64 {
        *self.entries.last().and_then(|r| r.last()).expect("non-empty table")
    }
}
