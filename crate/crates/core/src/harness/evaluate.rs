use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pool::Scenario;
use crate::baseline::pftf_schedule;
use crate::error::{Error, Result};
use crate::nn::NetworkParameters;
use crate::phy::evaluate_decision;
use crate::radio::EnvironmentState;
use crate::rng::tag;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentResult {
    pub index: usize,
    pub learned_reward: f64,
    pub baseline_reward: f64,
    /// `learned / baseline`; absent when the baseline reward is 0.
    pub ratio: Option<f64>,
}

/// Learned (greedy) versus PFTF on identical environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub environments: Vec<EnvironmentResult>,
    /// Environments left out of the ratios because the baseline scored 0.
    pub zero_baseline: usize,
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub mean_learned_reward: f64,
    pub mean_baseline_reward: f64,
}

impl EvaluationReport {
    /// Sorted normalized ratios (baseline-0 environments excluded).
    pub fn ratios(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.environments.iter().filter_map(|e| e.ratio).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    pub fn from_results(environments: Vec<EnvironmentResult>) -> Result<Self> {
        if environments.is_empty() {
            return Err(Error::config("evaluation needs at least one environment"));
        }
        let n = environments.len() as f64;
        let zero_baseline = environments.iter().filter(|e| e.ratio.is_none()).count();
        let mut report = Self {
            mean_learned_reward: environments.iter().map(|e| e.learned_reward).sum::<f64>() / n,
            mean_baseline_reward: environments.iter().map(|e| e.baseline_reward).sum::<f64>() / n,
            environments,
            zero_baseline,
            median_ratio: f64::NAN,
            mean_ratio: f64::NAN,
        };
        let ratios = report.ratios();
        if !ratios.is_empty() {
            report.median_ratio = median(&ratios);
            report.mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        }
        Ok(report)
    }
}

/// Median of sorted values (mean of the middle pair for even lengths).
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "median of nothing");
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Greedy network decision and PFTF decision on every environment, both
/// scored by the same evaluator on the same realisation.
pub fn evaluate_against_baseline(
    cfg: &ExperimentConfig,
    params: &NetworkParameters,
    envs: &[EnvironmentState],
) -> Result<EvaluationReport> {
    let scenario = Scenario::new(cfg)?;
    if params.shape != scenario.shape {
        return Err(Error::Shape(format!(
            "checkpoint shape {:?} does not match scenario shape {:?}",
            params.shape, scenario.shape
        )));
    }
    let results = envs
        .par_iter()
        .enumerate()
        .map(|(index, env)| {
            let (_, learned) = scenario.greedy(params, &cfg.features, env)?;
            let base_alloc = pftf_schedule(env, &scenario.model)?;
            let baseline = evaluate_decision(env, &base_alloc, &scenario.model)?.reward;
            Ok(EnvironmentResult {
                index,
                learned_reward: learned,
                baseline_reward: baseline,
                ratio: (baseline > 0.0).then(|| learned / baseline),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvaluationReport::from_results(results)
}

/// Fresh evaluation pool of `cfg.evaluation.n_envs` environments.
pub fn evaluation_pool(cfg: &ExperimentConfig) -> Result<Vec<EnvironmentState>> {
    if cfg.evaluation.n_envs == 0 {
        return Err(Error::config("evaluation.n_envs must be at least 1"));
    }
    Scenario::new(cfg)?.pool(cfg.seed, &[tag::EVAL_ENV], cfg.evaluation.n_envs)
}

/// PFTF rewards alone.
pub fn baseline_rewards(cfg: &ExperimentConfig, envs: &[EnvironmentState]) -> Result<Vec<f64>> {
    let scenario = Scenario::new(cfg)?;
    envs.par_iter()
        .map(|env| {
            let a = pftf_schedule(env, &scenario.model)?;
            Ok(evaluate_decision(env, &a, &scenario.model)?.reward)
        })
        .collect()
}

/// Channel-estimate SNRs of the standard sweep; `None` is perfect CSI.
pub const SNR_CE_SWEEP_DB: [Option<f64>; 5] = [Some(0.0), Some(5.0), Some(10.0), Some(20.0), None];

pub fn snr_ce_label(snr: Option<f64>) -> String {
    match snr {
        Some(db) if db.is_finite() => format!("snr_ce_{db}db"),
        _ => "snr_ce_perfect".to_string(),
    }
}

/// Evaluates one network on every impairment setting of `settings`, each on
/// its own fresh pool; returns `(label, report)` pairs in order.
pub fn snr_ce_sweep(
    cfg: &ExperimentConfig,
    params: &NetworkParameters,
    settings: &[Option<f64>],
) -> Result<Vec<(String, EvaluationReport)>> {
    settings
        .iter()
        .map(|&snr| {
            let mut c = cfg.clone();
            c.scenario.impairments.snr_ce_db = snr;
            let pool = evaluation_pool(&c)?;
            Ok((snr_ce_label(snr), evaluate_against_baseline(&c, params, &pool)?))
        })
        .collect()
}
