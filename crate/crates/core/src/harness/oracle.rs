use crate::alloc::Allocation;
use crate::error::{Error, Result};
use crate::mcts::Problem;
use crate::mdp::EpisodeState;

/// Largest leaf count the oracle accepts by default.
pub const DEFAULT_ORACLE_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub reward: f64,
    pub allocation: Allocation,
    pub leaves: u128,
}

/// `|A|^N_subband`, saturating.
pub fn leaf_count(n_actions: usize, n_subband: usize) -> u128 {
    (0..n_subband).fold(1u128, |acc, _| acc.saturating_mul(n_actions as u128))
}

/// Scores every leaf of the scheduling tree and keeps the best (first in
/// lexicographic action order on ties).
pub fn exhaustive_oracle(problem: &Problem, budget: u128) -> Result<OracleResult> {
    let leaves = leaf_count(problem.table.len(), problem.env.n_subband());
    if leaves > budget {
        return Err(Error::OracleBudget { leaves, budget });
    }
    let mut best: Option<(f64, Allocation)> = None;
    let mut stack = vec![problem.root()];
    let mut visited = 0u128;
    // depth-first, children pushed in reverse so action 0 is explored first
    while let Some(state) = stack.pop() {
        if state.is_terminal() {
            visited += 1;
            let r = problem.reward(&state.allocation)?;
            if best.as_ref().map_or(true, |(b, _)| r > *b) {
                best = Some((r, state.allocation));
            }
            continue;
        }
        for a in (0..problem.table.len()).rev() {
            stack.push(state.step(a, problem.table)?);
        }
    }
    let (reward, allocation) = best.expect("at least one leaf");
    debug_assert_eq!(visited, leaves);
    Ok(OracleResult {
        reward,
        allocation,
        leaves: visited,
    })
}

/// Reward of the leaf reached by `actions` from the root.
pub fn leaf_reward(problem: &Problem, actions: &[usize]) -> Result<f64> {
    let mut s: EpisodeState = problem.root();
    for &a in actions {
        s = s.step(a, problem.table)?;
    }
    problem.reward(&s.allocation)
}
