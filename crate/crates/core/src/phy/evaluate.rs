use serde::{Deserialize, Serialize};

use super::link::{blep, link_adapt, mean_mutual_information, user_rate, LinkAdaptation};
use super::mi::{MiBlepConfig, MiBlepModel};
use super::precoder::{compute_precoders, compute_sinr};
use super::tbs::{TbsConfig, TbsTable};
use crate::alloc::Allocation;
use crate::error::{Error, Result};
use crate::radio::{ChannelConfig, EnvironmentState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyConfig {
    pub tbs: TbsConfig,
    pub mi: MiBlepConfig,
    pub blep_target: f64,
    pub reward_beta: f64,
}

impl Default for PhyConfig {
    fn default() -> Self {
        Self {
            tbs: TbsConfig::default(),
            mi: MiBlepConfig::default(),
            blep_target: 0.1,
            reward_beta: 0.1,
        }
    }
}

/// Everything needed to score a decision besides the environment itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub table: TbsTable,
    pub mi: MiBlepModel,
    pub blep_target: f64,
    pub reward_beta: f64,
    pub tti_s: f64,
    pub max_users_per_subband: usize,
}

impl LinkModel {
    pub fn new(cfg: &PhyConfig, channel: &ChannelConfig, max_users_per_subband: usize) -> Result<Self> {
        if !(cfg.blep_target > 0.0 && cfg.blep_target < 1.0) {
            return Err(Error::config("phy: blep_target must be in (0, 1)"));
        }
        if !(cfg.reward_beta > 0.0) {
            return Err(Error::config("phy: reward_beta must be positive"));
        }
        if max_users_per_subband == 0 {
            return Err(Error::config("phy: at least one user per subband"));
        }
        Ok(Self {
            table: TbsTable::synthetic(&cfg.tbs, channel.symbols_per_subband(), channel.n_subband())?,
            mi: MiBlepModel::new(cfg.mi.clone()),
            blep_target: cfg.blep_target,
            reward_beta: cfg.reward_beta,
            tti_s: channel.tti_s,
            max_users_per_subband,
        })
    }

    /// Buffer size that never truncates a transport block:
    /// `N_subband × largest TBS`.
    pub fn full_buffer_bits(&self) -> u64 {
        self.table.max_size() as u64 * self.table.largest()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub tbs_bits: u64,
    pub mcs: Option<usize>,
    /// BLEP assumed by link adaptation (estimated channel).
    pub predicted_blep: f64,
    /// Realised BLEP (true channel); 1 when no block is sent.
    pub blep: f64,
    pub rate_bps: f64,
    pub pf_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub reward: f64,
    pub users: Vec<LinkResult>,
}

/// Scores a final allocation.
///
/// Precoders and link adaptation use `h_est`; the realised SINR, BLEP and
/// rate use `h_true` with the same precoders and transport blocks. The
/// reward is `β · Σ_k R_k / R̄_k`.
pub fn evaluate_decision(env: &EnvironmentState, alloc: &Allocation, model: &LinkModel) -> Result<DecisionOutcome> {
    alloc.validate(env.n_user(), env.n_subband(), model.max_users_per_subband)?;
    let sigma2 = env.noise_variance;
    let precoders = compute_precoders(&env.h_est, alloc, sigma2)?;
    let sinr_est = compute_sinr(&env.h_est, &precoders, alloc, sigma2)?;
    let sinr_true = compute_sinr(&env.h_true, &precoders, alloc, sigma2)?;

    let mut users = Vec::with_capacity(env.n_user());
    let mut total_pf = 0.0;
    for k in 0..env.n_user() {
        let est = sinr_est.user_values(k, alloc);
        let la = if est.is_empty() {
            LinkAdaptation::NONE
        } else {
            link_adapt(&est, &model.table, &model.mi, model.blep_target)
        };
        let (realised_blep, rate) = match la.mcs {
            Some(mcs) => {
                let real = sinr_true.user_values(k, alloc);
                let mi = mean_mutual_information(&real, mcs, &model.table, &model.mi);
                let p = blep(mi, la.tbs_bits, real.len(), &model.table, &model.mi);
                (p, user_rate(la.tbs_bits, p, env.buffers.n_bits[k], model.tti_s))
            }
            None => (1.0, 0.0),
        };
        let pf = rate / env.avg_rates[k];
        total_pf += pf;
        users.push(LinkResult {
            tbs_bits: la.tbs_bits,
            mcs: la.mcs,
            predicted_blep: la.predicted_blep,
            blep: realised_blep,
            rate_bps: rate,
            pf_utility: pf,
        });
    }
    Ok(DecisionOutcome {
        reward: model.reward_beta * total_pf,
        users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{sample_environment, EnvironmentConfig, ImpairmentConfig};
    use crate::rng::stream;

    fn setup(imp: ImpairmentConfig, seed: u64) -> (EnvironmentState, LinkModel) {
        let cfg = EnvironmentConfig {
            impairments: imp,
            ..EnvironmentConfig::default()
        };
        let model = LinkModel::new(&PhyConfig::default(), &cfg.channel, 2).unwrap();
        let env = sample_environment(&cfg, model.full_buffer_bits(), &mut stream(seed, &[])).unwrap();
        (env, model)
    }

    #[test]
    fn empty_allocation_scores_zero() {
        let (env, model) = setup(ImpairmentConfig::default(), 1);
        let out = evaluate_decision(&env, &Allocation::empty(4, 10), &model).unwrap();
        assert_eq!(out.reward, 0.0);
    }

    #[test]
    fn reward_is_beta_times_pf_sum() {
        let (mut env, model) = setup(ImpairmentConfig::default(), 2);
        let mut alloc = Allocation::empty(4, 10);
        for j in 0..10 {
            alloc.set(j % 4, j, true);
        }
        let first = evaluate_decision(&env, &alloc, &model).unwrap();
        // Pin R̄_k to the realised rates: every U_PF,k becomes 1.
        env.avg_rates = first.users.iter().map(|u| u.rate_bps).collect();
        assert!(env.avg_rates.iter().all(|&r| r > 0.0));
        let second = evaluate_decision(&env, &alloc, &model).unwrap();
        assert!((second.reward - 0.4).abs() < 1e-12);
    }

    #[test]
    fn perfect_csi_realised_blep_equals_predicted() {
        let (env, model) = setup(ImpairmentConfig::default(), 3);
        let mut alloc = Allocation::empty(4, 10);
        for j in 0..10 {
            alloc.set(0, j, true);
            alloc.set(1 + j % 3, j, true);
        }
        let out = evaluate_decision(&env, &alloc, &model).unwrap();
        for u in &out.users {
            if u.mcs.is_some() {
                assert_eq!(u.blep, u.predicted_blep);
            }
        }
    }

    #[test]
    fn rejects_overfull_subband() {
        let (env, model) = setup(ImpairmentConfig::default(), 4);
        let mut alloc = Allocation::empty(4, 10);
        for k in 0..3 {
            alloc.set(k, 0, true);
        }
        assert!(matches!(evaluate_decision(&env, &alloc, &model), Err(Error::Allocation(_))));
        assert!(evaluate_decision(&env, &Allocation::empty(5, 10), &model).is_err());
    }

    #[test]
    fn evaluation_is_pure() {
        let (env, model) = setup(
            ImpairmentConfig {
                snr_ce_db: Some(5.0),
                ..ImpairmentConfig::default()
            },
            5,
        );
        let mut alloc = Allocation::empty(4, 10);
        alloc.set(2, 3, true);
        alloc.set(1, 3, true);
        alloc.set(0, 7, true);
        let a = evaluate_decision(&env, &alloc, &model).unwrap();
        let b = evaluate_decision(&env, &alloc, &model).unwrap();
        assert_eq!(a, b);
        assert!(a.reward >= 0.0 && a.reward.is_finite());
    }
}
