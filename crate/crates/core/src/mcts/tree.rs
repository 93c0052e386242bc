use super::evaluator::{Evaluator, Problem};
use crate::error::{Error, Result};
use crate::mdp::EpisodeState;

/// Statistics of one state and its outgoing edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub state: EpisodeState,
    /// `P(s, a)`; empty until the node is expanded.
    pub priors: Vec<f64>,
    /// `N(s, a)`.
    pub visits: Vec<u32>,
    /// `W(s, a)`.
    pub value_sum: Vec<f64>,
    pub children: Vec<Option<usize>>,
    /// Reward of a terminal node, cached on first evaluation.
    pub terminal_reward: Option<f64>,
}

impl SearchNode {
    pub fn new(state: EpisodeState) -> Self {
        Self {
            state,
            priors: Vec::new(),
            visits: Vec::new(),
            value_sum: Vec::new(),
            children: Vec::new(),
            terminal_reward: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.state.is_terminal()
    }

    pub fn is_expanded(&self) -> bool {
        !self.priors.is_empty()
    }

    /// `Q(s, a) = W/N`, zero for unvisited edges.
    pub fn q(&self, action: usize) -> f64 {
        match self.visits[action] {
            0 => 0.0,
            n => self.value_sum[action] / n as f64,
        }
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().map(|&n| n as u64).sum()
    }
}

/// `argmax_a Q(s,a) + c_puct · P(s,a) · √(Σ_b N(s,b)) / (1 + N(s,a))`,
/// ties to the lowest index. With no visits yet every exploration term is
/// zero, so the first selection is action 0.
pub fn select_child(node: &SearchNode, c_puct: f64) -> usize {
    select_child_scaled(node, c_puct, None)
}

/// Running minimum and maximum of every value backed up in a tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for ValueBounds {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl ValueBounds {
    pub fn update(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    /// `(q − min)/(max − min)`, or `q` unchanged while the range is empty.
    pub fn normalize(&self, q: f64) -> f64 {
        if self.max > self.min {
            (q - self.min) / (self.max - self.min)
        } else {
            q
        }
    }
}

/// [`select_child`] with visited `Q` values rescaled to `[0, 1]` by the
/// tree's value range (unvisited edges keep `Q = 0`).
pub fn select_child_scaled(node: &SearchNode, c_puct: f64, bounds: Option<&ValueBounds>) -> usize {
    assert!(node.is_expanded(), "selection on an unexpanded node");
    let sqrt_total = (node.total_visits() as f64).sqrt();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for a in 0..node.priors.len() {
        let u = c_puct * node.priors[a] * sqrt_total / (1.0 + node.visits[a] as f64);
        let q = match bounds {
            Some(b) if node.visits[a] > 0 => b.normalize(node.q(a)),
            _ => node.q(a),
        };
        let score = q + u;
        if score > best_score {
            best = a;
            best_score = score;
        }
    }
    best
}

/// Arena of nodes; node 0 is the root.
#[derive(Debug, Clone)]
pub struct SearchTree {
    pub nodes: Vec<SearchNode>,
    pub bounds: ValueBounds,
}

impl SearchTree {
    pub fn new(root: EpisodeState) -> Self {
        Self {
            nodes: vec![SearchNode::new(root)],
            bounds: ValueBounds::default(),
        }
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Child of `node` along `action`, created on first use.
    pub fn child(&mut self, node: usize, action: usize, problem: &Problem) -> Result<usize> {
        if let Some(c) = self.nodes[node].children[action] {
            return Ok(c);
        }
        let state = self.nodes[node].state.step(action, problem.table)?;
        let id = self.nodes.len();
        self.nodes.push(SearchNode::new(state));
        self.nodes[node].children[action] = Some(id);
        Ok(id)
    }

    /// Value of a leaf. Terminal nodes return (and cache) the decision
    /// reward; other nodes store the evaluator's priors and return its value.
    pub fn expand_and_evaluate<E: Evaluator + ?Sized>(
        &mut self,
        node: usize,
        problem: &Problem,
        evaluator: &mut E,
    ) -> Result<f64> {
        let n = &self.nodes[node];
        if n.is_terminal() {
            if let Some(r) = n.terminal_reward {
                return Ok(r);
            }
            let r = problem.reward(&n.state.allocation)?;
            self.nodes[node].terminal_reward = Some(r);
            return Ok(r);
        }
        if n.is_expanded() {
            return Err(Error::AlreadyExpanded(node));
        }
        let eval = evaluator.evaluate(problem, &n.state)?;
        let size = problem.table.len();
        if eval.priors.len() != size {
            return Err(Error::Shape(format!(
                "evaluator returned {} priors for {size} actions",
                eval.priors.len()
            )));
        }
        let n = &mut self.nodes[node];
        n.priors = eval.priors;
        n.visits = vec![0; size];
        n.value_sum = vec![0.0; size];
        n.children = vec![None; size];
        Ok(eval.value)
    }

    /// The subtree below `node` as a tree of its own, statistics intact;
    /// `node` becomes the new root.
    pub fn subtree(&self, node: usize) -> SearchTree {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut order = vec![node];
        map[node] = 0;
        let mut i = 0;
        while i < order.len() {
            for &c in self.nodes[order[i]].children.iter().flatten() {
                map[c] = order.len();
                order.push(c);
            }
            i += 1;
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let mut n = self.nodes[old].clone();
                n.children.iter_mut().flatten().for_each(|c| *c = map[*c]);
                n
            })
            .collect();
        SearchTree {
            nodes,
            bounds: self.bounds,
        }
    }

    /// `N += 1`, `W += value` on every `(node, action)` edge of `path`.
    pub fn backpropagate(&mut self, path: &[(usize, usize)], value: f64) {
        for &(node, action) in path {
            let n = &mut self.nodes[node];
            n.visits[action] += 1;
            n.value_sum[action] += value;
            let q = n.q(action);
            self.bounds.update(q);
        }
    }
}
