use rand::Rng;

use crate::alloc::Allocation;
use crate::error::Result;
use crate::mdp::{ActionTable, EpisodeState, FeatureConfig, FeatureEncoder};
use crate::nn::NetworkParameters;
use crate::phy::{evaluate_decision, LinkModel};
use crate::radio::EnvironmentState;
use crate::rng::SimRng;

/// One environment to be scheduled: the world, how decisions are scored and
/// which decisions exist.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub env: &'a EnvironmentState,
    pub model: &'a LinkModel,
    pub table: &'a ActionTable,
}

impl Problem<'_> {
    pub fn root(&self) -> EpisodeState {
        EpisodeState::root(self.env.n_user(), self.env.n_subband())
    }

    /// Terminal reward of a complete allocation.
    pub fn reward(&self, alloc: &Allocation) -> Result<f64> {
        Ok(evaluate_decision(self.env, alloc, self.model)?.reward)
    }
}

/// Priors over the action table and a value estimate for a non-terminal
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub priors: Vec<f64>,
    pub value: f64,
}

pub trait Evaluator {
    fn evaluate(&mut self, problem: &Problem, state: &EpisodeState) -> Result<Evaluation>;

    /// Number of `evaluate` calls so far.
    fn calls(&self) -> usize;
}

/// Uniform priors and a constant value.
#[derive(Debug, Clone)]
pub struct UniformEvaluator {
    pub value: f64,
    calls: usize,
}

impl UniformEvaluator {
    pub fn new(value: f64) -> Self {
        Self { value, calls: 0 }
    }
}

impl Evaluator for UniformEvaluator {
    fn evaluate(&mut self, problem: &Problem, _state: &EpisodeState) -> Result<Evaluation> {
        self.calls += 1;
        let n = problem.table.len();
        Ok(Evaluation {
            priors: vec![1.0 / n as f64; n],
            value: self.value,
        })
    }

    fn calls(&self) -> usize {
        self.calls
    }
}

/// Uniform priors; the value is the reward of one uniformly random
/// completion of the episode.
#[derive(Debug, Clone)]
pub struct RolloutEvaluator {
    rng: SimRng,
    calls: usize,
}

impl RolloutEvaluator {
    pub fn new(rng: SimRng) -> Self {
        Self { rng, calls: 0 }
    }
}

impl Evaluator for RolloutEvaluator {
    fn evaluate(&mut self, problem: &Problem, state: &EpisodeState) -> Result<Evaluation> {
        self.calls += 1;
        let n = problem.table.len();
        let mut s = state.clone();
        while !s.is_terminal() {
            s = s.step(self.rng.random_range(0..n), problem.table)?;
        }
        Ok(Evaluation {
            priors: vec![1.0 / n as f64; n],
            value: problem.reward(&s.allocation)?,
        })
    }

    fn calls(&self) -> usize {
        self.calls
    }
}

/// Network forward pass on the encoded state of one environment.
#[derive(Debug, Clone)]
pub struct NetworkEvaluator<'a> {
    params: &'a NetworkParameters,
    encoder: FeatureEncoder,
    calls: usize,
}

impl<'a> NetworkEvaluator<'a> {
    /// The encoder reads `env.h_est` only.
    pub fn new(params: &'a NetworkParameters, env: &EnvironmentState, features: &FeatureConfig) -> Self {
        Self {
            params,
            encoder: FeatureEncoder::new(env, features),
            calls: 0,
        }
    }

    pub fn encoder(&self) -> &FeatureEncoder {
        &self.encoder
    }
}

impl Evaluator for NetworkEvaluator<'_> {
    fn evaluate(&mut self, _problem: &Problem, state: &EpisodeState) -> Result<Evaluation> {
        self.calls += 1;
        let features = self.encoder.encode(state);
        let p = self.params.predict(&features.tokens)?;
        Ok(Evaluation {
            priors: p.policy,
            value: p.value,
        })
    }

    fn calls(&self) -> usize {
        self.calls
    }
}
