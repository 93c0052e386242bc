use std::path::Path;

use serde::{Deserialize, Serialize};

use super::oracle::DEFAULT_ORACLE_BUDGET;
use crate::error::{Error, Result};
use crate::mcts::SearchConfig;
use crate::mdp::FeatureConfig;
use crate::nn::{AdamConfig, NetworkConfig};
use crate::phy::PhyConfig;
use crate::radio::{ChannelConfig, EnvironmentConfig, ImpairmentConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub n_iterations: usize,
    pub envs_per_iteration: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// Size of the fixed greedy-evaluation pool scored after every iteration.
    pub holdout_envs: usize,
    pub adam: AdamConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            n_iterations: 10,
            envs_per_iteration: 100,
            epochs: 50,
            batch_size: 64,
            holdout_envs: 200,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub n_envs: usize,
    /// Largest `|A|^N_subband` the exhaustive oracle will enumerate.
    pub oracle_budget: u64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            n_envs: 500,
            oracle_budget: DEFAULT_ORACLE_BUDGET as u64,
        }
    }
}

/// One experiment: scenario, scoring, model, search and schedule.
///
/// Every section and key is optional in a TOML file; missing values come
/// from the profile the file is layered on (`desk` unless stated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// `M`, users per subband.
    pub max_users_per_subband: usize,
    pub scenario: EnvironmentConfig,
    pub phy: PhyConfig,
    pub features: FeatureConfig,
    pub network: NetworkConfig,
    pub search: SearchConfig,
    pub training: TrainingConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

pub const PROFILES: [&str; 3] = ["tiny", "desk", "full"];

impl ExperimentConfig {
    /// 4 users, `M = 2`, 6 subbands, `SNR_CE = 0 dB`; 10 iterations × 100
    /// environments × 100 simulations.
    pub fn desk() -> Self {
        Self {
            seed: 1,
            max_users_per_subband: 2,
            scenario: EnvironmentConfig {
                n_user: 4,
                channel: ChannelConfig {
                    n_prb: 24,
                    ..ChannelConfig::default()
                },
                impairments: ImpairmentConfig {
                    snr_ce_db: Some(0.0),
                    ..ImpairmentConfig::default()
                },
                ..EnvironmentConfig::default()
            },
            phy: PhyConfig::default(),
            features: FeatureConfig::default(),
            network: NetworkConfig::default(),
            search: SearchConfig {
                n_simulations: 100,
                ..SearchConfig::default()
            },
            training: TrainingConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }

    /// 4 users, `M = 2`, 10 subbands, perfect CSI; 25 iterations × 200
    /// environments × 200 simulations, 10000 evaluation environments.
    pub fn full() -> Self {
        Self {
            scenario: EnvironmentConfig::default(),
            search: SearchConfig::default(),
            training: TrainingConfig {
                n_iterations: 25,
                envs_per_iteration: 200,
                ..TrainingConfig::default()
            },
            evaluation: EvaluationConfig {
                n_envs: 10_000,
                ..EvaluationConfig::default()
            },
            ..Self::desk()
        }
    }

    /// 2 users, `M = 2`, 3 subbands, perfect CSI: 27 leaves, small enough
    /// for the exhaustive oracle.
    pub fn tiny() -> Self {
        Self {
            scenario: EnvironmentConfig {
                n_user: 2,
                channel: ChannelConfig {
                    n_prb: 12,
                    ..ChannelConfig::default()
                },
                ..EnvironmentConfig::default()
            },
            search: SearchConfig {
                n_simulations: 500,
                ..SearchConfig::default()
            },
            training: TrainingConfig {
                n_iterations: 2,
                envs_per_iteration: 20,
                epochs: 5,
                holdout_envs: 50,
                ..TrainingConfig::default()
            },
            evaluation: EvaluationConfig {
                n_envs: 100,
                ..EvaluationConfig::default()
            },
            ..Self::desk()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "tiny" => Ok(Self::tiny()),
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            other => Err(Error::config(format!(
                "unknown profile {other:?}; expected one of {PROFILES:?}"
            ))),
        }
    }

    /// Layers a TOML document over `base`: keys present in the document
    /// replace the base values, nested tables merge.
    pub fn from_toml_over(base: &ExperimentConfig, text: &str) -> Result<Self> {
        let overlay: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        let mut merged = toml::Table::try_from(base).map_err(|e| Error::config(e.to_string()))?;
        merge(&mut merged, overlay);
        let cfg: ExperimentConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, base: &ExperimentConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_over(base, &text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.features.validate()?;
        self.search.validate()?;
        self.training.adam.validate()?;
        let n_user = self.scenario.n_user;
        if self.max_users_per_subband == 0 || self.max_users_per_subband > n_user + 1 {
            return Err(Error::config(format!(
                "max_users_per_subband must be in 1..={}",
                n_user + 1
            )));
        }
        let t = &self.training;
        if t.n_iterations == 0 || t.envs_per_iteration == 0 || t.epochs == 0 || t.batch_size == 0 {
            return Err(Error::config("training: all schedule counts must be at least 1"));
        }
        // shape checks (d_model divisibility and so on)
        crate::nn::NetworkShape::new(
            n_user,
            self.scenario.channel.n_subband(),
            self.max_users_per_subband,
            &self.network,
        )?;
        crate::phy::LinkModel::new(&self.phy, &self.scenario.channel, self.max_users_per_subband)?;
        Ok(())
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate() {
        for p in PROFILES {
            ExperimentConfig::profile(p).unwrap().validate().unwrap();
        }
        assert!(ExperimentConfig::profile("huge").is_err());
        assert_eq!(ExperimentConfig::desk().scenario.channel.n_subband(), 6);
        assert_eq!(ExperimentConfig::full().scenario.channel.n_subband(), 10);
        assert_eq!(ExperimentConfig::tiny().scenario.channel.n_subband(), 3);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::full();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml_over(&ExperimentConfig::tiny(), &text).unwrap(), cfg);
    }

    #[test]
    fn overlay_merges_nested_tables() {
        let text = "seed = 9\n[scenario.impairments]\nsnr_ce_db = 5.0\n[search]\nc_puct = 2.0\n";
        let cfg = ExperimentConfig::from_toml_over(&ExperimentConfig::desk(), text).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.scenario.impairments.snr_ce_db, Some(5.0));
        assert_eq!(cfg.scenario.n_user, 4);
        assert_eq!(cfg.search.c_puct, 2.0);
        assert_eq!(cfg.search.n_simulations, 100);
    }

    #[test]
    fn rejects_bad_documents() {
        let base = ExperimentConfig::desk();
        assert!(ExperimentConfig::from_toml_over(&base, "bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_over(&base, "[training]\nepochs = 0").is_err());
        assert!(ExperimentConfig::from_toml_over(&base, "max_users_per_subband = 9").is_err());
        assert!(ExperimentConfig::from_toml_over(&base, "[network]\nd_model = 30").is_err());
        assert!(ExperimentConfig::from_toml_over(&base, "seed = ").is_err());
    }
}
