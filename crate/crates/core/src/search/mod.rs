//! Total-order progression search.
//!
//! A search node pairs a world state with the remaining task network.
//! Expanding a node progresses the head of its network: an applicable
//! primitive head is executed, a compound head is replaced by the
//! subtasks of each of its methods. Nodes are ordered by `f` (see
//! [`Algorithm`]), then by smaller `h`, then by insertion order.

mod engine;
mod network;
mod plan;
mod validate;

use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::time::Duration;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::ground::{GroundedModel, StateBitset, TaskRef};

pub use engine::{search, solve};
pub use network::{Iter as NetworkIter, Network};
pub use plan::{parse_plan_text, plan_text};
pub use validate::{validate, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// `f = g + h`
    Astar,
    /// `f = h`
    Gbfs,
    /// `f = g + w·h`
    Wastar,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Astar, Algorithm::Gbfs, Algorithm::Wastar];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Astar => "astar",
            Algorithm::Gbfs => "gbfs",
            Algorithm::Wastar => "wastar",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "astar" => Ok(Algorithm::Astar),
            "gbfs" => Ok(Algorithm::Gbfs),
            "wastar" => Ok(Algorithm::Wastar),
            _ => Err(format!(
                "unknown algorithm {s:?} (expected astar, gbfs or wastar)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    /// Weight of `h` under [`Algorithm::Wastar`]; at least 1.
    pub weight: Ratio<i64>,
    pub time_limit: Option<Duration>,
    pub node_budget: Option<u64>,
    /// Advisory limit on the estimated bytes held by the search.
    pub memory_budget: Option<u64>,
    /// Longest run of consecutive method applications on one path.
    pub method_streak_cap: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: Algorithm::Gbfs,
            weight: Ratio::from_integer(5),
            time_limit: Some(Duration::from_secs(1800)),
            node_budget: None,
            memory_budget: None,
            method_streak_cap: 10_000,
        }
    }
}

impl SearchConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SearchConfig {
            algorithm,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Solved,
    Exhausted,
    Timeout,
    NodeBudgetExhausted,
    MemoryExceeded,
    HeuristicFailed,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::Solved => "solved",
            SearchStatus::Exhausted => "exhausted",
            SearchStatus::Timeout => "timeout",
            SearchStatus::NodeBudgetExhausted => "node-budget-exhausted",
            SearchStatus::MemoryExceeded => "memory-exceeded",
            SearchStatus::HeuristicFailed => "heuristic-failed",
        }
    }
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a node was derived from its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Operator(u32),
    Method(u32),
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: Rc<StateBitset>,
    pub network: Network,
    pub g: u64,
    pub parent: Option<usize>,
    pub step: Option<Step>,
    pub seq: u64,
    /// Consecutive method applications leading to this node.
    pub streak: u32,
}

impl SearchNode {
    pub fn root(model: &GroundedModel) -> Self {
        SearchNode {
            state: Rc::new(model.initial_state.clone()),
            network: Network::from_slice(&model.initial_network),
            g: 0,
            parent: None,
            step: None,
            seq: 0,
            streak: 0,
        }
    }

    pub fn new(state: StateBitset, network: Network) -> Self {
        SearchNode {
            state: Rc::new(state),
            network,
            g: 0,
            parent: None,
            step: None,
            seq: 0,
            streak: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub status: SearchStatus,
    /// Primitive operator names, synthetic checks excluded.
    pub plan: Vec<String>,
    pub derivation: Vec<Step>,
    pub expanded: u64,
    pub generated: u64,
    /// Seconds.
    pub wall_time: f64,
    pub plan_length: usize,
    pub plan_cost: u64,
    /// Reason for a heuristic failure.
    pub diagnostic: Option<String>,
}

/// Successors of `node`, in method order for a compound head.
///
/// `parent` and `seq` of the children are left for the caller to set.
pub fn expand(model: &GroundedModel, node: &SearchNode) -> Vec<SearchNode> {
    let Some(head) = node.network.head() else {
        return Vec::new();
    };
    match head {
        TaskRef::Primitive(o) => {
            let op = &model.operators[o as usize];
            if !op.applicable(&node.state) {
                return Vec::new();
            }
            vec![SearchNode {
                state: Rc::new(op.apply(&node.state)),
                network: node.network.tail(),
                g: node.g + op.cost as u64,
                parent: None,
                step: Some(Step::Operator(o)),
                seq: 0,
                streak: 0,
            }]
        }
        TaskRef::Compound(c) => {
            let tail = node.network.tail();
            model.compound_tasks[c as usize]
                .methods
                .iter()
                .map(|&m| SearchNode {
                    state: node.state.clone(),
                    network: tail.prepend(&model.methods[m as usize].subtasks),
                    g: node.g,
                    parent: None,
                    step: Some(Step::Method(m)),
                    seq: 0,
                    streak: node.streak + 1,
                })
                .collect()
        }
    }
}

/// Empty network and all goal facts hold.
pub fn is_goal(model: &GroundedModel, node: &SearchNode) -> bool {
    node.network.is_empty() && model.goals.is_subset(&node.state)
}
