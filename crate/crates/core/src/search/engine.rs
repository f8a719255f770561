use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;
use std::time::Instant;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul};

use super::{
    expand, is_goal, Algorithm, Network, SearchConfig, SearchNode, SearchResult, SearchStatus, Step,
};
use crate::ground::{GroundedModel, StateBitset};
use crate::heuristic::{HValue, HeuristicError, HeuristicHandle, HeuristicSpec};

/// Initializes `spec` on `model` and runs [`search`].
///
/// Initialization time counts against the configured time limit.
pub fn solve(
    model: &GroundedModel,
    spec: &HeuristicSpec,
    config: &SearchConfig,
) -> Result<SearchResult, HeuristicError> {
    let start = Instant::now();
    let root = SearchNode::root(model);
    let mut handle = spec.initialize(model, &root)?;
    Ok(run(model, &mut handle, config, start))
}

/// Best-first search from the model's initial node.
///
/// `handle` must have been initialized against `model`.
pub fn search(
    model: &GroundedModel,
    handle: &mut HeuristicHandle,
    config: &SearchConfig,
) -> SearchResult {
    run(model, handle, config, Instant::now())
}

type Key = (Rc<StateBitset>, Network);

const TIME_CHECK_INTERVAL: u64 = 128;
const MEMORY_CHECK_INTERVAL: u64 = 1000;

fn priority(config: &SearchConfig, g: u64, h: HValue) -> Option<HValue> {
    let g = Ratio::from_integer(i64::try_from(g).ok()?);
    match config.algorithm {
        Algorithm::Astar => g.checked_add(&h),
        Algorithm::Gbfs => Some(h),
        Algorithm::Wastar => config.weight.checked_mul(&h)?.checked_add(&g),
    }
}

struct Run<'a> {
    model: &'a GroundedModel,
    start: Instant,
    expanded: u64,
    generated: u64,
}

impl Run<'_> {
    fn finish(&self, status: SearchStatus, diagnostic: Option<String>) -> SearchResult {
        SearchResult {
            status,
            plan: Vec::new(),
            derivation: Vec::new(),
            expanded: self.expanded,
            generated: self.generated,
            wall_time: self.start.elapsed().as_secs_f64(),
            plan_length: 0,
            plan_cost: 0,
            diagnostic,
        }
    }

    fn solved(&self, nodes: &[SearchNode], goal: usize) -> SearchResult {
        let mut derivation = Vec::new();
        let mut cur = Some(goal);
        while let Some(i) = cur {
            derivation.extend(nodes[i].step);
            cur = nodes[i].parent;
        }
        derivation.reverse();
        let plan: Vec<String> = derivation
            .iter()
            .filter_map(|s| match *s {
                Step::Operator(o) if !self.model.operators[o as usize].synthetic => {
                    Some(self.model.operators[o as usize].name.clone())
                }
                _ => None,
            })
            .collect();
        SearchResult {
            plan_length: plan.len(),
            plan,
            derivation,
            plan_cost: nodes[goal].g,
            ..self.finish(SearchStatus::Solved, None)
        }
    }
}

fn run(
    model: &GroundedModel,
    h: &mut HeuristicHandle,
    config: &SearchConfig,
    start: Instant,
) -> SearchResult {
    let mut run = Run {
        model,
        start,
        expanded: 0,
        generated: 0,
    };
    let poisoned =
        |h: &HeuristicHandle| Some(h.poisoned().unwrap_or("heuristic failed").to_owned());

    let state_bytes = model.initial_state.words().len() * 8;
    let node_bytes = std::mem::size_of::<SearchNode>() + 3 * std::mem::size_of::<HValue>() + 64;
    let mut cells: u64 = model.initial_network.len() as u64;

    let mut nodes: Vec<SearchNode> = Vec::new();
    let mut best: HashMap<Key, (u64, usize)> = HashMap::new();
    let mut open: BinaryHeap<Reverse<(HValue, HValue, usize)>> = BinaryHeap::new();

    let root = SearchNode::root(model);
    let Some(h0) = h.evaluate(&root) else {
        return run.finish(SearchStatus::HeuristicFailed, poisoned(h));
    };
    let Some(f0) = priority(config, 0, h0) else {
        return run.finish(
            SearchStatus::HeuristicFailed,
            Some("priority overflow".into()),
        );
    };
    best.insert((root.state.clone(), root.network.clone()), (0, 0));
    nodes.push(root);
    open.push(Reverse((f0, h0, 0)));

    let mut pops: u64 = 0;
    while let Some(Reverse((_, _, idx))) = open.pop() {
        if pops.is_multiple_of(TIME_CHECK_INTERVAL) {
            if let Some(limit) = config.time_limit {
                if start.elapsed() >= limit {
                    return run.finish(SearchStatus::Timeout, None);
                }
            }
        }
        pops += 1;
        let node = nodes[idx].clone();
        let key = (node.state.clone(), node.network.clone());
        if best.get(&key).map(|e| e.1) != Some(idx) {
            continue;
        }
        if is_goal(model, &node) {
            return run.solved(&nodes, idx);
        }
        if config.node_budget.is_some_and(|b| run.expanded >= b) {
            return run.finish(SearchStatus::NodeBudgetExhausted, None);
        }
        if run.expanded.is_multiple_of(MEMORY_CHECK_INTERVAL) {
            if let Some(limit) = config.memory_budget {
                let estimate = nodes.len() as u64 * (node_bytes + state_bytes) as u64
                    + best.len() as u64 * 48
                    + cells * 48;
                if estimate > limit {
                    return run.finish(SearchStatus::MemoryExceeded, None);
                }
            }
        }
        run.expanded += 1;
        for mut child in expand(model, &node) {
            if child.streak > config.method_streak_cap {
                continue;
            }
            run.generated += 1;
            let key = (child.state.clone(), child.network.clone());
            if best.get(&key).is_some_and(|&(g, _)| g <= child.g) {
                continue;
            }
            let id = nodes.len();
            child.parent = Some(idx);
            child.seq = id as u64;
            let Some(hv) = h.evaluate(&child) else {
                return run.finish(SearchStatus::HeuristicFailed, poisoned(h));
            };
            let Some(f) = priority(config, child.g, hv) else {
                return run.finish(
                    SearchStatus::HeuristicFailed,
                    Some("priority overflow".into()),
                );
            };
            if let Some(Step::Method(m)) = child.step {
                cells += model.methods[m as usize].subtasks.len() as u64;
            }
            best.insert(key, (child.g, id));
            nodes.push(child);
            open.push(Reverse((f, hv, id)));
        }
    }
    run.finish(SearchStatus::Exhausted, None)
}
