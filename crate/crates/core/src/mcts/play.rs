use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::evaluator::{Evaluator, Problem};
use super::search::{search_tree, SearchConfig};
use super::tree::SearchTree;
use crate::alloc::Allocation;
use crate::error::{Error, Result};
use crate::mdp::EpisodeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlayMode {
    /// Search at every subband, record `π`, sample the action from `π`.
    SelfPlay,
    /// No search: one evaluator call per subband, take the argmax prior.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// State the decision was taken in.
    pub state: EpisodeState,
    /// Search policy (self-play) or evaluator priors (greedy).
    pub policy: Vec<f64>,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub steps: Vec<StepRecord>,
    pub allocation: Allocation,
    /// Terminal reward `z`, shared by every step.
    pub reward: f64,
    /// Tree nodes created across all searches.
    pub tree_nodes: usize,
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, a| if v[a] > v[b] { a } else { b })
}

/// Plays one episode from the root to the terminal allocation.
pub fn play_episode<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    problem: &Problem,
    evaluator: &mut E,
    config: &SearchConfig,
    mode: PlayMode,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    let mut state = problem.root();
    let mut steps = Vec::with_capacity(problem.env.n_subband());
    let mut tree_nodes = 0;
    let mut tree: Option<SearchTree> = None;
    while !state.is_terminal() {
        let (policy, action) = match mode {
            PlayMode::Greedy => {
                let eval = evaluator.evaluate(problem, &state)?;
                let a = argmax(&eval.priors);
                (eval.priors, a)
            }
            PlayMode::SelfPlay => {
                let t = tree.get_or_insert_with(|| SearchTree::new(state.clone()));
                let r = search_tree(t, problem, evaluator, config, rng)?;
                tree_nodes += r.tree_size;
                let a = if config.temperature == 0.0 {
                    argmax(&r.policy)
                } else {
                    WeightedIndex::new(&r.policy)
                        .map_err(|e| Error::config(format!("search policy: {e}")))?
                        .sample(rng)
                };
                tree = match (config.reuse_tree, tree.take()) {
                    (true, Some(t)) => t.nodes[0].children[a].map(|c| t.subtree(c)),
                    _ => None,
                };
                (r.policy, a)
            }
        };
        let next = state.step(action, problem.table)?;
        steps.push(StepRecord {
            state,
            policy,
            action,
        });
        state = next;
    }
    let reward = problem.reward(&state.allocation)?;
    Ok(EpisodeRecord {
        steps,
        allocation: state.allocation,
        reward,
        tree_nodes,
    })
}
