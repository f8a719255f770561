//! Uniform-cost search over a grounded model, written independently of
//! the planner's search engine.
//!
//! Conventions shared with the engine: nodes are `(state, network)` pairs;
//! the frontier is ordered by `g`, then by insertion order; a node is
//! re-queued only on a strictly smaller `g`, and outdated queue entries
//! are skipped; the goal test happens when a node is taken from the
//! frontier, and that node is not counted as expanded.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use htnplan::ground::{GroundedModel, TaskRef};

type State = BTreeSet<usize>;
type Key = (State, Vec<TaskRef>);

struct Ops {
    pre: Vec<Vec<usize>>,
    add: Vec<Vec<usize>>,
    del: Vec<Vec<usize>>,
    cost: Vec<u64>,
}

impl Ops {
    fn new(model: &GroundedModel) -> Ops {
        Ops {
            pre: model
                .operators
                .iter()
                .map(|o| o.pre.ones().collect())
                .collect(),
            add: model
                .operators
                .iter()
                .map(|o| o.add.ones().collect())
                .collect(),
            del: model
                .operators
                .iter()
                .map(|o| o.del.ones().collect())
                .collect(),
            cost: model.operators.iter().map(|o| o.cost as u64).collect(),
        }
    }
}

fn successors(model: &GroundedModel, ops: &Ops, (state, net): &Key) -> Vec<(Key, u64)> {
    let Some(&head) = net.first() else {
        return Vec::new();
    };
    match head {
        TaskRef::Primitive(o) => {
            let o = o as usize;
            if !ops.pre[o].iter().all(|f| state.contains(f)) {
                return Vec::new();
            }
            let mut s = state.clone();
            for f in &ops.del[o] {
                s.remove(f);
            }
            s.extend(ops.add[o].iter().copied());
            vec![((s, net[1..].to_vec()), ops.cost[o])]
        }
        TaskRef::Compound(c) => model.compound_tasks[c as usize]
            .methods
            .iter()
            .map(|&m| {
                let mut n = model.methods[m as usize].subtasks.clone();
                n.extend_from_slice(&net[1..]);
                ((state.clone(), n), 0)
            })
            .collect(),
    }
}

fn root(model: &GroundedModel) -> Key {
    (
        model.initial_state.ones().collect(),
        model.initial_network.clone(),
    )
}

fn is_goal(model: &GroundedModel, (state, net): &Key) -> bool {
    net.is_empty() && model.goals.ones().all(|f| state.contains(&f))
}

/// Networks longer than this make [`reachable_nodes`] give up.
pub const MAX_NETWORK: usize = 64;

/// Number of distinct nodes reachable from the root, or `None` beyond `cap`
/// nodes or once some network exceeds [`MAX_NETWORK`] tasks.
pub fn reachable_nodes(model: &GroundedModel, cap: usize) -> Option<usize> {
    let ops = Ops::new(model);
    let start = root(model);
    let mut seen: BTreeSet<Key> = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(k) = queue.pop_front() {
        for (child, _) in successors(model, &ops, &k) {
            if seen.insert(child.clone()) {
                if seen.len() > cap || child.1.len() > MAX_NETWORK {
                    return None;
                }
                queue.push_back(child);
            }
        }
    }
    Some(seen.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UcsOutcome {
    pub expanded: u64,
    /// Cost of the plan found, if any.
    pub cost: Option<u64>,
}

pub fn uniform_cost(model: &GroundedModel) -> UcsOutcome {
    let ops = Ops::new(model);
    let mut keys: Vec<(Key, u64)> = Vec::new();
    let mut best: HashMap<Key, (u64, usize)> = HashMap::new();
    let mut frontier: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let start = root(model);
    best.insert(start.clone(), (0, 0));
    keys.push((start, 0));
    frontier.push(Reverse((0, 0)));
    let mut expanded = 0;
    while let Some(Reverse((g, id))) = frontier.pop() {
        let key = keys[id].0.clone();
        if best[&key].1 != id {
            continue;
        }
        if is_goal(model, &key) {
            return UcsOutcome {
                expanded,
                cost: Some(g),
            };
        }
        expanded += 1;
        for (child, c) in successors(model, &ops, &key) {
            let cg = g + c;
            if best.get(&child).is_some_and(|&(bg, _)| bg <= cg) {
                continue;
            }
            let cid = keys.len();
            best.insert(child.clone(), (cg, cid));
            keys.push((child, cg));
            frontier.push(Reverse((cg, cid)));
        }
    }
    UcsOutcome {
        expanded,
        cost: None,
    }
}
