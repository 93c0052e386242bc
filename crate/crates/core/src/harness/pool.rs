use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::mcts::{play_episode, NetworkEvaluator, PlayMode, Problem};
use crate::mdp::ActionTable;
use crate::nn::{NetworkParameters, NetworkShape};
use crate::phy::LinkModel;
use crate::radio::{sample_environment, EnvironmentConfig, EnvironmentState};
use crate::rng::stream;
use crate::Allocation;

/// Link model, action table and network shape implied by a config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub env: EnvironmentConfig,
    pub model: LinkModel,
    pub table: ActionTable,
    pub shape: NetworkShape,
}

impl Scenario {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.max_users_per_subband;
        let env = cfg.scenario.clone();
        Ok(Self {
            model: LinkModel::new(&cfg.phy, &env.channel, m)?,
            table: ActionTable::new(env.n_user, m)?,
            shape: NetworkShape::new(env.n_user, env.channel.n_subband(), m, &cfg.network)?,
            env,
        })
    }

    pub fn problem<'a>(&'a self, env: &'a EnvironmentState) -> Problem<'a> {
        Problem {
            env,
            model: &self.model,
            table: &self.table,
        }
    }

    /// Environment `index` of the stream `seed` + `path`.
    pub fn sample(&self, seed: u64, path: &[u64], index: u64) -> Result<EnvironmentState> {
        let mut full = path.to_vec();
        full.push(index);
        sample_environment(&self.env, self.model.full_buffer_bits(), &mut stream(seed, &full))
    }

    /// Environments `0..count` of the stream `seed` + `path`.
    pub fn pool(&self, seed: u64, path: &[u64], count: usize) -> Result<Vec<EnvironmentState>> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample(seed, path, i))
            .collect()
    }

    /// Greedy (search-free) allocation of the network on one environment.
    pub fn greedy(&self, params: &NetworkParameters, features: &crate::mdp::FeatureConfig, env: &EnvironmentState) -> Result<(Allocation, f64)> {
        let problem = self.problem(env);
        let mut ev = NetworkEvaluator::new(params, env, features);
        // greedy play never touches the search config or the generator
        let rec = play_episode(
            &problem,
            &mut ev,
            &crate::mcts::SearchConfig::default(),
            PlayMode::Greedy,
            &mut stream(0, &[]),
        )?;
        Ok((rec.allocation, rec.reward))
    }

    /// Greedy allocations and rewards over a pool, in pool order.
    pub fn greedy_pool(
        &self,
        params: &NetworkParameters,
        features: &crate::mdp::FeatureConfig,
        envs: &[EnvironmentState],
    ) -> Result<Vec<(Allocation, f64)>> {
        envs.par_iter().map(|e| self.greedy(params, features, e)).collect()
    }
}
