//! A lifted interpreter for [`Micro`] instances and an exhaustive
//! explorer that checks a grounded model against it node by node.

use std::collections::{BTreeSet, HashMap, VecDeque};

use htnplan::ground::{GroundedModel, StateBitset, TaskRef};

use crate::brute::atom_name;
use crate::micro::{GAtom, Lit, Micro};

pub type World = BTreeSet<GAtom>;

/// Splits `act0[o1,o2]` into `("act0", [1, 2])`.
pub fn parse_call(name: &str) -> Option<(String, Vec<usize>)> {
    let (head, rest) = name.split_once('[')?;
    let inner = rest.strip_suffix(']')?;
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|o| o.strip_prefix('o')?.parse().ok())
            .collect::<Option<_>>()?
    };
    Some((head.to_owned(), args))
}

fn index(head: &str, prefix: &str) -> Option<usize> {
    head.strip_prefix(prefix)?.parse().ok()
}

fn holds(lits: &[Lit], b: &[usize], world: &World) -> bool {
    lits.iter().all(|l| {
        let truth = match l.pred {
            None => b[l.args[0]] == b[l.args[1]],
            Some(p) => world.contains(&(p, l.args.iter().map(|&i| b[i]).collect())),
        };
        truth == l.positive
    })
}

impl Micro {
    pub fn initial_world(&self) -> World {
        self.init.iter().cloned().collect()
    }

    pub fn action_applicable(&self, a: usize, b: &[usize], world: &World) -> bool {
        holds(&self.actions[a].pre, b, world)
    }

    /// Deletes first, then adds.
    pub fn apply_action(&self, a: usize, b: &[usize], world: &World) -> World {
        let def = &self.actions[a];
        let mut w = world.clone();
        for e in &def.del {
            w.remove(&(e.pred, e.args.iter().map(|&i| b[i]).collect()));
        }
        for e in &def.add {
            w.insert((e.pred, e.args.iter().map(|&i| b[i]).collect()));
        }
        w
    }

    pub fn method_applicable(&self, m: usize, b: &[usize], world: &World) -> bool {
        holds(&self.methods[m].pre, b, world)
    }

    pub fn goal_holds(&self, world: &World) -> bool {
        self.goal.iter().all(|g| world.contains(g))
    }

    /// Executes a plan of `act<i>[...]` names from the initial world.
    pub fn replay(&self, plan: &[String]) -> Result<World, String> {
        let mut w = self.initial_world();
        for (i, step) in plan.iter().enumerate() {
            let (head, b) =
                parse_call(step).ok_or_else(|| format!("step {i}: malformed {step}"))?;
            let a =
                index(&head, "act").ok_or_else(|| format!("step {i}: {step} is not an action"))?;
            if !self.action_applicable(a, &b, &w) {
                return Err(format!("step {i}: {step} is not applicable"));
            }
            w = self.apply_action(a, &b, &w);
        }
        if !self.goal_holds(&w) {
            return Err("goal does not hold after the plan".into());
        }
        Ok(w)
    }
}

/// Outcome of [`explore`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    /// `None` when a cap cut the exploration short without finding a plan.
    pub solvable: Option<bool>,
    pub nodes: usize,
    pub plans_replayed: usize,
    pub method_checks: usize,
}

/// Breadth-first exploration of `model`, carrying the lifted world along
/// every path. Fails on the first disagreement between the two:
/// a fact bit that differs from the world, an operator or method
/// precondition check that differs from the lifted precondition, or a
/// plan that the lifted interpreter rejects.
pub fn explore(
    micro: &Micro,
    model: &GroundedModel,
    max_nodes: usize,
    max_network: usize,
) -> Result<Exploration, String> {
    let fact_atoms: Vec<(String, bool)> = model
        .facts
        .iter()
        .map(|f| (f.name.clone(), f.negated))
        .collect();
    let atom_by_name: HashMap<String, GAtom> =
        crate::micro::all_atoms(&micro.pred_arity, micro.objects.len())
            .into_iter()
            .map(|a| (atom_name(&a), a))
            .collect();
    let check_state = |state: &StateBitset, world: &World| -> Result<(), String> {
        for (i, (name, negated)) in fact_atoms.iter().enumerate() {
            let a = atom_by_name
                .get(name)
                .ok_or_else(|| format!("unknown fact {name}"))?;
            if state.contains(i) != (world.contains(a) != *negated) {
                return Err(format!(
                    "fact {}{name} disagrees with the lifted state",
                    if *negated { "-" } else { "+" }
                ));
            }
        }
        Ok(())
    };

    struct Node {
        state: StateBitset,
        network: Vec<TaskRef>,
        world: World,
        parent: Option<usize>,
        op: Option<u32>,
    }
    let mut nodes = vec![Node {
        state: model.initial_state.clone(),
        network: model.initial_network.clone(),
        world: micro.initial_world(),
        parent: None,
        op: None,
    }];
    let mut seen: BTreeSet<(Vec<u64>, Vec<TaskRef>)> = BTreeSet::new();
    seen.insert((nodes[0].state.words().to_vec(), nodes[0].network.clone()));
    let mut queue = VecDeque::from([0usize]);
    let mut out = Exploration {
        solvable: Some(false),
        nodes: 1,
        plans_replayed: 0,
        method_checks: 0,
    };
    let mut capped = false;
    while let Some(i) = queue.pop_front() {
        check_state(&nodes[i].state, &nodes[i].world)?;
        let Some(&head) = nodes[i].network.first() else {
            if model.goals.is_subset(&nodes[i].state) {
                let mut plan = Vec::new();
                let mut cur = Some(i);
                while let Some(c) = cur {
                    if let Some(o) = nodes[c].op {
                        let op = &model.operators[o as usize];
                        if !op.synthetic {
                            plan.push(op.name.clone());
                        }
                    }
                    cur = nodes[c].parent;
                }
                plan.reverse();
                micro.replay(&plan)?;
                out.plans_replayed += 1;
                out.solvable = Some(true);
            } else if micro.goal_holds(&nodes[i].world) {
                return Err("lifted goal holds but grounded goal does not".into());
            }
            continue;
        };
        let mut children = Vec::new();
        match head {
            TaskRef::Primitive(o) => {
                let op = &model.operators[o as usize];
                let ok = op.applicable(&nodes[i].state);
                let world = if op.synthetic {
                    nodes[i].world.clone()
                } else {
                    let (h, b) = parse_call(&op.name).ok_or("malformed operator name")?;
                    let a = index(&h, "act").ok_or("operator is not an action")?;
                    if ok != micro.action_applicable(a, &b, &nodes[i].world) {
                        return Err(format!(
                            "applicability of {} disagrees with the lifted action",
                            op.name
                        ));
                    }
                    micro.apply_action(a, &b, &nodes[i].world)
                };
                if ok {
                    children.push((
                        op.apply(&nodes[i].state),
                        nodes[i].network[1..].to_vec(),
                        world,
                        Some(o),
                    ));
                }
            }
            TaskRef::Compound(c) => {
                for &mid in &model.compound_tasks[c as usize].methods {
                    let gm = &model.methods[mid as usize];
                    let (h, b) = parse_call(&gm.name).ok_or("malformed method name")?;
                    let mi = index(&h, "m").ok_or("method name")?;
                    let lifted = micro.method_applicable(mi, &b, &nodes[i].world);
                    let compiled = gm
                        .precondition_op
                        .is_none_or(|p| model.operators[p as usize].applicable(&nodes[i].state));
                    if lifted != compiled {
                        return Err(format!(
                            "precondition of {} disagrees with its check operator",
                            gm.name
                        ));
                    }
                    out.method_checks += 1;
                    let mut net = gm.subtasks.clone();
                    net.extend_from_slice(&nodes[i].network[1..]);
                    children.push((nodes[i].state.clone(), net, nodes[i].world.clone(), None));
                }
            }
        }
        for (state, network, world, op) in children {
            if network.len() > max_network || nodes.len() >= max_nodes {
                capped = true;
                continue;
            }
            if seen.insert((state.words().to_vec(), network.clone())) {
                nodes.push(Node {
                    state,
                    network,
                    world,
                    parent: Some(i),
                    op,
                });
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    out.nodes = nodes.len();
    if capped && out.solvable == Some(false) {
        out.solvable = None;
    }
    Ok(out)
}
