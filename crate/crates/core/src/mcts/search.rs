use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::evaluator::{Evaluator, Problem};
use super::tree::{select_child_scaled, SearchTree};
use crate::error::{Error, Result};
use crate::mdp::EpisodeState;

/// Root prior mixing `P ← (1−ε)·P + ε·Dir(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletNoise {
    pub fraction: f64,
    pub concentration: f64,
}

impl Default for DirichletNoise {
    fn default() -> Self {
        Self {
            fraction: 0.25,
            concentration: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n_simulations: usize,
    pub c_puct: f64,
    pub root_noise: Option<DirichletNoise>,
    /// Exponent `1/τ` applied to root visit counts; `0` means argmax.
    pub temperature: f64,
    /// Rescale visited `Q` values to `[0, 1]` by the range of values seen in
    /// the tree before applying the selection rule.
    pub normalize_q: bool,
    /// Keep the subtree below the chosen action for the next decision of an
    /// episode instead of starting each search from scratch.
    pub reuse_tree: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_simulations: 200,
            c_puct: 1.5,
            root_noise: None,
            temperature: 1.0,
            normalize_q: true,
            reuse_tree: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_simulations == 0 {
            return Err(Error::config("search: n_simulations must be at least 1"));
        }
        if !(self.c_puct > 0.0) {
            return Err(Error::config("search: c_puct must be positive"));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("search: temperature must be finite and non-negative"));
        }
        if let Some(n) = self.root_noise {
            if !((0.0..=1.0).contains(&n.fraction) && n.concentration > 0.0) {
                return Err(Error::config("search: noise fraction in [0, 1], concentration > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// `π(a) ∝ N(root, a)^(1/τ)`.
    pub policy: Vec<f64>,
    /// Root visit counts.
    pub visits: Vec<u32>,
    /// Visit-weighted mean of the root `Q` values.
    pub root_value: f64,
    pub tree_size: usize,
}

/// `π(a) ∝ N(a)^(1/τ)`; `τ = 0` puts all mass on the most visited action
/// (lowest index on ties).
pub fn extract_policy(visits: &[u32], temperature: f64) -> Vec<f64> {
    let mut pi = vec![0.0; visits.len()];
    if temperature == 0.0 {
        let best = (0..visits.len()).fold(0, |b, a| if visits[a] > visits[b] { a } else { b });
        pi[best] = 1.0;
        return pi;
    }
    let max = visits.iter().copied().max().unwrap_or(0) as f64;
    if max == 0.0 {
        pi.iter_mut().for_each(|p| *p = 1.0 / visits.len() as f64);
        return pi;
    }
    // scale by the max count first so large exponents stay finite
    for (p, &n) in pi.iter_mut().zip(visits) {
        *p = (n as f64 / max).powf(1.0 / temperature);
    }
    let sum: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= sum);
    pi
}

fn add_root_noise<R: Rng + ?Sized>(priors: &mut [f64], noise: DirichletNoise, rng: &mut R) -> Result<()> {
    let gamma = Gamma::new(noise.concentration, 1.0).map_err(|e| Error::config(e.to_string()))?;
    let draws: Vec<f64> = priors.iter().map(|_| gamma.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 {
        for (p, d) in priors.iter_mut().zip(draws) {
            *p = (1.0 - noise.fraction) * *p + noise.fraction * d / sum;
        }
    }
    Ok(())
}

/// Runs `n_simulations` select → expand/evaluate → backpropagate passes
/// from `state`.
///
/// The root is expanded before the first simulation and that evaluation is
/// not counted, so the root visit counts sum to `n_simulations`.
pub fn run_search<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    problem: &Problem,
    state: &EpisodeState,
    evaluator: &mut E,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    search_tree(&mut SearchTree::new(state.clone()), problem, evaluator, config, rng)
}

/// [`run_search`] continuing from an existing tree: `n_simulations` more
/// passes from its root, so reused statistics add to the new visits.
pub fn search_tree<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    tree: &mut SearchTree,
    problem: &Problem,
    evaluator: &mut E,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<SearchResult> {
    if tree.root().is_terminal() {
        return Err(Error::TerminalState);
    }
    if !tree.root().is_expanded() {
        tree.expand_and_evaluate(0, problem, evaluator)?;
    }
    if let Some(noise) = config.root_noise {
        add_root_noise(&mut tree.nodes[0].priors, noise, rng)?;
    }
    let mut path = Vec::with_capacity(tree.root().state.allocation.n_subband());
    for _ in 0..config.n_simulations {
        path.clear();
        let mut node = 0;
        let value = loop {
            let n = &tree.nodes[node];
            if n.is_terminal() || !n.is_expanded() {
                break tree.expand_and_evaluate(node, problem, evaluator)?;
            }
            let a = select_child_scaled(n, config.c_puct, config.normalize_q.then_some(&tree.bounds));
            path.push((node, a));
            node = tree.child(node, a, problem)?;
        };
        tree.backpropagate(&path, value);
    }
    let root = tree.root();
    let total = root.total_visits() as f64;
    Ok(SearchResult {
        policy: extract_policy(&root.visits, config.temperature),
        visits: root.visits.clone(),
        root_value: root.value_sum.iter().sum::<f64>() / total,
        tree_size: tree.len(),
    })
}
