//! PFTF: greedy proportional-fair-in-time-and-frequency scheduling by
//! marginal utility, extended to `M` users per subband.

use crate::alloc::Allocation;
use crate::error::Result;
use crate::phy::{link_adapt, subband_sinrs, LinkModel};
use crate::radio::EnvironmentState;

/// `U = (S + R_cand) / (R̄ + S)` where `S` is the summed rate of the
/// subbands already held, or 0 once `S · T_TTI` exceeds the buffer.
pub fn pftf_utility(current_sum: f64, candidate_rate: f64, avg_rate: f64, buffer_bits: u64, tti_s: f64) -> f64 {
    if current_sum * tti_s <= buffer_bits as f64 {
        (current_sum + candidate_rate) / (avg_rate + current_sum)
    } else {
        0.0
    }
}

/// Utility of the held set alone; 0 for an empty set.
fn held_utility(held: usize, current_sum: f64, avg_rate: f64, buffer_bits: u64, tti_s: f64) -> f64 {
    if held == 0 {
        0.0
    } else {
        pftf_utility(current_sum, 0.0, avg_rate, buffer_bits, tti_s)
    }
}

/// Single-subband rate estimate `(1 − BLEP)·TBS / T_TTI` of each of `users`
/// when co-scheduled on `subband`, from `h_est`.
fn subband_rates(env: &EnvironmentState, model: &LinkModel, subband: usize, users: &[usize]) -> Vec<f64> {
    subband_sinrs(&env.h_est, subband, users, env.noise_variance)
        .into_iter()
        .map(|sinr| {
            let la = link_adapt(&[sinr], &model.table, &model.mi, model.blep_target);
            (1.0 - la.predicted_blep) * la.tbs_bits as f64 / model.tti_s
        })
        .collect()
}

/// Greedy marginal-utility allocation on `h_est`.
///
/// Each round scores every `(user k, open subband j)` pair with
/// `Λ = U_k(I_k ∪ {j}) − U_k(I_k)` where the candidate rate assumes the users
/// already on `j` stay co-scheduled. The best pair (ties: lowest user, then
/// lowest subband) is allocated if `Λ > 0` and the rates of everyone on that
/// subband are recomputed; otherwise its subband is closed. Subbands also
/// close when they hold `M` users.
pub fn pftf_schedule(env: &EnvironmentState, model: &LinkModel) -> Result<Allocation> {
    let (n_user, n_subband) = (env.n_user(), env.n_subband());
    let m = model.max_users_per_subband.min(n_user);
    let mut alloc = Allocation::empty(n_user, n_subband);
    let mut open = vec![true; n_subband];
    // rate[k][j] for held (k, j)
    let mut rate = vec![vec![0.0; n_subband]; n_user];
    let mut held_sum = vec![0.0; n_user];
    let mut held = vec![0usize; n_user];

    while open.iter().any(|&o| o) {
        let mut best: Option<(f64, usize, usize)> = None;
        for j in (0..n_subband).filter(|&j| open[j]) {
            let on_j = alloc.users_on(j);
            for k in (0..n_user).filter(|&k| !alloc.get(k, j)) {
                let mut users = on_j.clone();
                users.push(k);
                let cand = *subband_rates(env, model, j, &users).last().expect("candidate");
                let (avg, buf) = (env.avg_rates[k], env.buffers.n_bits[k]);
                let gain = pftf_utility(held_sum[k], cand, avg, buf, model.tti_s)
                    - held_utility(held[k], held_sum[k], avg, buf, model.tti_s);
                let better = match best {
                    None => true,
                    Some((b, bk, bj)) => gain > b || (gain == b && (k, j) < (bk, bj)),
                };
                if better {
                    best = Some((gain, k, j));
                }
            }
        }
        let Some((gain, k, j)) = best else {
            break;
        };
        if gain > 0.0 {
            alloc.set(k, j, true);
            held[k] += 1;
            let users = alloc.users_on(j);
            for (&u, r) in users.iter().zip(subband_rates(env, model, j, &users)) {
                held_sum[u] += r - rate[u][j];
                rate[u][j] = r;
            }
            if users.len() >= m {
                open[j] = false;
            }
        } else {
            open[j] = false;
        }
    }
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::PhyConfig;
    use crate::radio::{sample_environment, ChannelConfig, EnvironmentConfig, ImpairmentConfig};
    use crate::rng::stream;
    use proptest::prelude::*;

    fn setup(n_user: usize, n_prb: usize, imp: ImpairmentConfig, seed: u64) -> (EnvironmentState, LinkModel) {
        let cfg = EnvironmentConfig {
            n_user,
            channel: ChannelConfig {
                n_prb,
                ..ChannelConfig::default()
            },
            impairments: imp,
            ..EnvironmentConfig::default()
        };
        let model = LinkModel::new(&PhyConfig::default(), &cfg.channel, 2).unwrap();
        let env = sample_environment(&cfg, model.full_buffer_bits(), &mut stream(seed, &[])).unwrap();
        (env, model)
    }

    #[test]
    fn utility_examples() {
        assert!((pftf_utility(0.0, 5e6, 2e6, 10_000, 1e-3) - 2.5).abs() < 1e-15);
        assert_eq!(pftf_utility(2e7, 5e6, 2e6, 10_000, 1e-3), 0.0);
        // a zero-rate candidate adds nothing
        let held = pftf_utility(3e6, 0.0, 2e6, 1 << 30, 1e-3);
        assert_eq!(pftf_utility(3e6, 0.0, 2e6, 1 << 30, 1e-3) - held, 0.0);
        assert!((held - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_full_buffer_user_takes_everything() {
        let (env, model) = setup(1, 40, ImpairmentConfig::default(), 3);
        let a = pftf_schedule(&env, &model).unwrap();
        assert_eq!(a.subbands_of(0), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn dead_channels_get_nothing() {
        let (mut env, model) = setup(3, 24, ImpairmentConfig::default(), 4);
        env.h_est.data.iter_mut().for_each(|c| *c *= 1e-9);
        assert!(pftf_schedule(&env, &model).unwrap().is_empty());
    }

    #[test]
    fn deterministic_and_within_limits() {
        let imp = ImpairmentConfig {
            snr_ce_db: Some(5.0),
            full_buffer: false,
            buffer_min_bits: 400.0,
            buffer_max_bits: 1000.0,
            ..ImpairmentConfig::default()
        };
        let (env, model) = setup(4, 40, imp, 5);
        let a = pftf_schedule(&env, &model).unwrap();
        assert_eq!(a, pftf_schedule(&env, &model).unwrap());
        assert!(a.validate(4, 10, 2).is_ok());
        assert!(!a.is_empty());
    }

    #[test]
    fn ignores_true_channel() {
        let (mut env, model) = setup(4, 24, ImpairmentConfig { snr_ce_db: Some(10.0), ..ImpairmentConfig::default() }, 6);
        let a = pftf_schedule(&env, &model).unwrap();
        env.h_true.data.iter_mut().for_each(|c| *c *= 0.1);
        assert_eq!(a, pftf_schedule(&env, &model).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn every_allocation_respects_m(seed in 0u64..10_000, n_user in 1usize..6, full in any::<bool>()) {
            let imp = ImpairmentConfig { full_buffer: full, ..ImpairmentConfig::default() };
            let (env, model) = setup(n_user, 24, imp, seed);
            let a = pftf_schedule(&env, &model).unwrap();
            prop_assert!(a.validate(n_user, 6, 2).is_ok());
        }
    }
}
