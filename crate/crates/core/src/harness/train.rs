use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pool::Scenario;
use crate::error::{Error, Result};
use crate::mcts::{play_episode, NetworkEvaluator, PlayMode};
use crate::nn::{train, AdamState, Checkpoint, NetworkParameters, TrainingSample};
use crate::radio::EnvironmentState;
use crate::rng::{stream, tag};

/// One line of the training metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    /// 0 is the untrained network.
    pub iteration: usize,
    pub dataset_size: usize,
    pub mean_self_play_reward: Option<f64>,
    pub first_epoch_loss: Option<f64>,
    pub final_epoch_loss: Option<f64>,
    /// Mean greedy reward on the fixed held-out pool.
    pub holdout_mean_reward: f64,
    pub elapsed_s: f64,
}

/// Network and optimiser after a run, plus the metrics of every iteration.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub params: NetworkParameters,
    pub adam: AdamState,
    pub metrics: Vec<IterationMetrics>,
}

fn holdout_mean(scenario: &Scenario, cfg: &ExperimentConfig, params: &NetworkParameters, pool: &[EnvironmentState]) -> Result<f64> {
    let rewards = scenario.greedy_pool(params, &cfg.features, pool)?;
    Ok(rewards.iter().map(|(_, r)| r).sum::<f64>() / pool.len().max(1) as f64)
}

/// Self-play records of one environment: `(s, π, z)` per subband, and `z`.
fn self_play(
    scenario: &Scenario,
    cfg: &ExperimentConfig,
    params: &NetworkParameters,
    env: &EnvironmentState,
    iteration: usize,
    index: usize,
) -> Result<(Vec<TrainingSample>, f64)> {
    let problem = scenario.problem(env);
    let mut ev = NetworkEvaluator::new(params, env, &cfg.features);
    let mut rng = stream(cfg.seed, &[tag::TRAIN_SEARCH, iteration as u64, index as u64]);
    let rec = play_episode(&problem, &mut ev, &cfg.search, PlayMode::SelfPlay, &mut rng)?;
    let samples = rec
        .steps
        .into_iter()
        .map(|s| TrainingSample {
            features: ev.encoder().encode(&s.state).tokens,
            policy: s.policy,
            value: rec.reward,
        })
        .collect();
    Ok((samples, rec.reward))
}

/// Alternates self-play data generation and network training.
///
/// Before the first iteration and after every iteration the network is
/// scored greedily on a fixed held-out pool; `on_iteration` receives each
/// metrics record with the current network and optimiser (iteration 0 is
/// the untrained network). Every random draw comes from a stream derived
/// from `cfg.seed`, so a run is reproducible bit for bit.
pub fn run_training<F>(cfg: &ExperimentConfig, on_iteration: F) -> Result<TrainingOutcome>
where
    F: FnMut(&IterationMetrics, &NetworkParameters, &AdamState) -> Result<()>,
{
    run_training_from(cfg, None, on_iteration)
}

/// [`run_training`] starting from saved weights (and optimiser moments, when
/// the checkpoint has them) instead of a fresh initialisation.
pub fn run_training_from<F>(cfg: &ExperimentConfig, initial: Option<Checkpoint>, mut on_iteration: F) -> Result<TrainingOutcome>
where
    F: FnMut(&IterationMetrics, &NetworkParameters, &AdamState) -> Result<()>,
{
    let scenario = Scenario::new(cfg)?;
    let start = Instant::now();
    let (mut params, mut adam) = match initial {
        None => (
            NetworkParameters::init(scenario.shape, &mut stream(cfg.seed, &[tag::NETWORK_INIT])),
            AdamState::new(cfg.training.adam.clone(), &scenario.shape),
        ),
        Some(ck) => {
            if ck.params.shape != scenario.shape {
                return Err(Error::Shape(format!(
                    "checkpoint shape {:?} does not match scenario shape {:?}",
                    ck.params.shape, scenario.shape
                )));
            }
            let adam = ck.adam.unwrap_or_else(|| AdamState::new(cfg.training.adam.clone(), &scenario.shape));
            (ck.params, adam)
        }
    };
    let holdout = scenario.pool(cfg.seed, &[tag::HOLDOUT_ENV], cfg.training.holdout_envs)?;

    let mut metrics = Vec::with_capacity(cfg.training.n_iterations + 1);
    let m0 = IterationMetrics {
        iteration: 0,
        dataset_size: 0,
        mean_self_play_reward: None,
        first_epoch_loss: None,
        final_epoch_loss: None,
        holdout_mean_reward: holdout_mean(&scenario, cfg, &params, &holdout)?,
        elapsed_s: start.elapsed().as_secs_f64(),
    };
    on_iteration(&m0, &params, &adam)?;
    metrics.push(m0);

    for it in 1..=cfg.training.n_iterations {
        let envs = scenario.pool(cfg.seed, &[tag::TRAIN_ENV, it as u64], cfg.training.envs_per_iteration)?;
        let played: Vec<(Vec<TrainingSample>, f64)> = envs
            .par_iter()
            .enumerate()
            .map(|(i, env)| self_play(&scenario, cfg, &params, env, it, i))
            .collect::<Result<_>>()?;
        let mean_reward = played.iter().map(|(_, z)| z).sum::<f64>() / played.len() as f64;
        let dataset: Vec<TrainingSample> = played.into_iter().flat_map(|(s, _)| s).collect();
        let losses = train(
            &mut params,
            &mut adam,
            &dataset,
            cfg.training.epochs,
            cfg.training.batch_size,
            &mut stream(cfg.seed, &[tag::TRAIN_SHUFFLE, it as u64]),
        )?;
        let m = IterationMetrics {
            iteration: it,
            dataset_size: dataset.len(),
            mean_self_play_reward: Some(mean_reward),
            first_epoch_loss: losses.first().copied(),
            final_epoch_loss: losses.last().copied(),
            holdout_mean_reward: holdout_mean(&scenario, cfg, &params, &holdout)?,
            elapsed_s: start.elapsed().as_secs_f64(),
        };
        on_iteration(&m, &params, &adam)?;
        metrics.push(m);
    }
    Ok(TrainingOutcome { params, adam, metrics })
}
