//! PUCT tree search over the scheduling tree and the episode runner.
//!
//! The game has a single player who maximises the terminal reward, so values
//! are backed up unchanged (no negation, no discount).

mod evaluator;
mod play;
mod search;
mod tree;

pub use evaluator::{Evaluation, Evaluator, NetworkEvaluator, Problem, RolloutEvaluator, UniformEvaluator};
pub use play::{play_episode, EpisodeRecord, PlayMode, StepRecord};
pub use search::{extract_policy, run_search, search_tree, DirichletNoise, SearchConfig, SearchResult};
pub use tree::{select_child, select_child_scaled, SearchNode, SearchTree, ValueBounds};
