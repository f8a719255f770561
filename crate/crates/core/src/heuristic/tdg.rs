use std::cell::Cell;
use std::fmt;

use crate::ground::{GroundedModel, TaskRef};

thread_local! {
    static METHOD_VISITS: Cell<u64> = const { Cell::new(0) };
}

/// Methods inspected by [`tdg_fixpoint`] on this thread so far.
///
/// Evaluating a TDG estimate never touches methods, so this counter stays
/// put across any number of evaluations.
pub fn method_visits() -> u64 {
    METHOD_VISITS.with(Cell::get)
}

/// Minimum decomposition cost of one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TdgCost {
    Finite(u64),
    /// No finite decomposition exists.
    Infinite,
}

impl TdgCost {
    pub fn finite(self) -> Option<u64> {
        match self {
            TdgCost::Finite(c) => Some(c),
            TdgCost::Infinite => None,
        }
    }

    fn add(self, other: TdgCost) -> TdgCost {
        match (self, other) {
            (TdgCost::Finite(a), TdgCost::Finite(b)) => TdgCost::Finite(a.saturating_add(b)),
            _ => TdgCost::Infinite,
        }
    }
}

impl fmt::Display for TdgCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdgCost::Finite(c) => write!(f, "{c}"),
            TdgCost::Infinite => f.write_str("inf"),
        }
    }
}

/// Per-task costs indexed by [`GroundedModel::task_index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TdgTable {
    pub costs: Vec<TdgCost>,
}

impl TdgTable {
    pub fn cost(&self, model: &GroundedModel, t: TaskRef) -> TdgCost {
        self.costs[model.task_index(t)]
    }

    /// One Bellman sweep over all methods; a converged table is a fixed point.
    pub fn sweep(&self, model: &GroundedModel) -> TdgTable {
        let mut next = self.clone();
        relax_all(model, &mut next.costs);
        next
    }

    /// Costs with `∞` replaced by `penalty`.
    pub fn clamped(&self, penalty: u64) -> Vec<u64> {
        self.costs
            .iter()
            .map(|c| c.finite().unwrap_or(penalty))
            .collect()
    }
}

fn method_cost(model: &GroundedModel, costs: &[TdgCost], m: usize) -> TdgCost {
    model.methods[m]
        .subtasks
        .iter()
        .fold(TdgCost::Finite(0), |acc, &t| {
            acc.add(costs[model.task_index(t)])
        })
}

/// Lowers every compound cost to its cheapest method; true if anything changed.
fn relax_all(model: &GroundedModel, costs: &mut [TdgCost]) -> bool {
    let mut changed = false;
    for m in 0..model.methods.len() {
        METHOD_VISITS.with(|c| c.set(c.get() + 1));
        let via = method_cost(model, costs, m);
        let slot = &mut costs[model.task_index(TaskRef::Compound(model.methods[m].task))];
        if via < *slot {
            *slot = via;
            changed = true;
        }
    }
    changed
}

/// Minimum decomposition cost of every task.
///
/// Operators cost `primitive_cost` (their own cost when `None`), except
/// synthetic precondition checks, which cost 0. Compound tasks that admit
/// a finite decomposition start at `abstract_init` and are lowered to
/// `min` over methods of the summed subtask costs until nothing changes;
/// tasks without one are [`TdgCost::Infinite`]. Costs that truly exceed
/// `abstract_init` stay capped at it.
pub fn tdg_fixpoint(
    model: &GroundedModel,
    primitive_cost: Option<u64>,
    abstract_init: u64,
) -> TdgTable {
    let nops = model.operators.len();
    let mut costs = Vec::with_capacity(model.num_tasks());
    for op in &model.operators {
        let c = if op.synthetic {
            0
        } else {
            primitive_cost.unwrap_or(op.cost as u64)
        };
        costs.push(TdgCost::Finite(c));
    }
    costs.resize(model.num_tasks(), TdgCost::Infinite);

    // Productive tasks: those with at least one finite decomposition.
    let mut productive = vec![false; model.compound_tasks.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for (m, method) in model.methods.iter().enumerate() {
            METHOD_VISITS.with(|c| c.set(c.get() + 1));
            let t = method.task as usize;
            if productive[t] {
                continue;
            }
            let ok = model.methods[m].subtasks.iter().all(|s| match *s {
                TaskRef::Primitive(_) => true,
                TaskRef::Compound(c) => productive[c as usize],
            });
            if ok {
                productive[t] = true;
                changed = true;
            }
        }
    }
    for (c, p) in productive.iter().enumerate() {
        if *p {
            costs[nops + c] = TdgCost::Finite(abstract_init);
        }
    }
    while relax_all(model, &mut costs) {}
    TdgTable { costs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{Fact, GroundCompoundTask, GroundMethod, GroundOperator, StateBitset};

    /// Model with `nops` unit-cost operators and the given methods,
    /// each `(task, subtasks)`.
    fn model(nops: u32, ntasks: u32, methods: &[(u32, Vec<TaskRef>)]) -> GroundedModel {
        let operators = (0..nops)
            .map(|i| GroundOperator {
                id: i,
                name: format!("a{i}[]"),
                cost: 1,
                pre: StateBitset::new(0),
                add: StateBitset::new(0),
                del: StateBitset::new(0),
                synthetic: false,
            })
            .collect();
        let mut compound_tasks: Vec<GroundCompoundTask> = (0..ntasks)
            .map(|i| GroundCompoundTask {
                id: i,
                name: format!("c{i}[]"),
                methods: vec![],
            })
            .collect();
        let methods = methods
            .iter()
            .enumerate()
            .map(|(i, (t, subs))| {
                compound_tasks[*t as usize].methods.push(i as u32);
                GroundMethod {
                    id: i as u32,
                    name: format!("m{i}[]"),
                    task: *t,
                    subtasks: subs.clone(),
                    precondition_op: None,
                }
            })
            .collect();
        GroundedModel {
            domain_name: "d".into(),
            problem_name: "p".into(),
            facts: Vec::<Fact>::new(),
            operators,
            compound_tasks,
            methods,
            initial_state: StateBitset::new(0),
            goals: StateBitset::new(0),
            initial_network: vec![],
        }
    }

    use TaskRef::{Compound as C, Primitive as P};

    #[test]
    fn min_over_methods() {
        let m = model(2, 1, &[(0, vec![P(0), P(1)]), (0, vec![P(0)])]);
        assert_eq!(
            tdg_fixpoint(&m, None, 100).cost(&m, C(0)),
            TdgCost::Finite(1)
        );
    }

    #[test]
    fn recursion_reaches_base_case() {
        let m = model(1, 1, &[(0, vec![P(0), C(0)]), (0, vec![P(0)])]);
        assert_eq!(
            tdg_fixpoint(&m, None, 100).cost(&m, C(0)),
            TdgCost::Finite(1)
        );
    }

    #[test]
    fn no_methods_is_infinite() {
        let m = model(1, 1, &[]);
        assert_eq!(
            tdg_fixpoint(&m, None, 100).cost(&m, C(0)),
            TdgCost::Infinite
        );
    }

    #[test]
    fn chain() {
        let m = model(1, 2, &[(0, vec![C(1)]), (1, vec![P(0)])]);
        let t = tdg_fixpoint(&m, None, 100);
        assert_eq!(t.cost(&m, C(0)), TdgCost::Finite(1));
        assert_eq!(t.cost(&m, C(1)), TdgCost::Finite(1));
        assert_eq!(t.sweep(&m), t);
    }

    #[test]
    fn primitive_cost_override() {
        let m = model(2, 1, &[(0, vec![P(0), P(1)])]);
        assert_eq!(
            tdg_fixpoint(&m, Some(0), 100).cost(&m, C(0)),
            TdgCost::Finite(0)
        );
        assert_eq!(
            tdg_fixpoint(&m, Some(3), 100).cost(&m, C(0)),
            TdgCost::Finite(6)
        );
    }
}
