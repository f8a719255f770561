//! Task hierarchies built directly as grounded models, and an
//! enumeration oracle for their minimum decomposition costs.

use std::collections::BTreeSet;

use htnplan::ground::{
    GroundCompoundTask, GroundMethod, GroundOperator, GroundedModel, StateBitset, TaskRef,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A model with no facts, operators of the given costs (`None` marks a
/// synthetic check), `ntasks` compound tasks and the given methods.
pub fn hierarchy(
    op_costs: &[Option<u32>],
    ntasks: usize,
    methods: &[(u32, Vec<TaskRef>)],
) -> GroundedModel {
    let empty = StateBitset::new(0);
    let operators = op_costs
        .iter()
        .enumerate()
        .map(|(i, c)| GroundOperator {
            id: i as u32,
            name: if c.is_some() {
                format!("a{i}[]")
            } else {
                format!("__mprec_k{i}[]")
            },
            cost: c.unwrap_or(0),
            pre: empty.clone(),
            add: empty.clone(),
            del: empty.clone(),
            synthetic: c.is_none(),
        })
        .collect();
    let mut compound_tasks: Vec<GroundCompoundTask> = (0..ntasks)
        .map(|i| GroundCompoundTask {
            id: i as u32,
            name: format!("c{i}[]"),
            methods: Vec::new(),
        })
        .collect();
    let methods = methods
        .iter()
        .enumerate()
        .map(|(i, (task, subtasks))| {
            compound_tasks[*task as usize].methods.push(i as u32);
            GroundMethod {
                id: i as u32,
                name: format!("m{i}[]"),
                task: *task,
                subtasks: subtasks.clone(),
                precondition_op: None,
            }
        })
        .collect();
    GroundedModel {
        domain_name: "hierarchy".into(),
        problem_name: "hierarchy".into(),
        facts: Vec::new(),
        operators,
        compound_tasks,
        methods,
        initial_state: empty.clone(),
        goals: empty,
        initial_network: if ntasks > 0 {
            vec![TaskRef::Compound(0)]
        } else {
            Vec::new()
        },
    }
}

/// A random acyclic hierarchy: task `i` only decomposes into operators
/// and tasks `j > i`.
pub fn random_acyclic(seed: u64, max_tasks: usize) -> GroundedModel {
    let mut rng = StdRng::seed_from_u64(seed);
    let nops = rng.gen_range(1..=3);
    let op_costs: Vec<Option<u32>> = (0..nops)
        .map(|_| {
            if rng.gen_bool(0.2) {
                None
            } else {
                Some(rng.gen_range(0..=3))
            }
        })
        .collect();
    let ntasks = rng.gen_range(1..=max_tasks);
    let mut methods = Vec::new();
    for t in 0..ntasks {
        for _ in 0..rng.gen_range(0..=3) {
            let subs = (0..rng.gen_range(0..=3))
                .map(|_| {
                    if t + 1 < ntasks && rng.gen_bool(0.5) {
                        TaskRef::Compound(rng.gen_range(t + 1..ntasks) as u32)
                    } else {
                        TaskRef::Primitive(rng.gen_range(0..nops) as u32)
                    }
                })
                .collect();
            methods.push((t as u32, subs));
        }
    }
    hierarchy(&op_costs, ntasks, &methods)
}

/// The cost of every complete decomposition tree of every task, as a set.
///
/// Requires an acyclic hierarchy. Returns one set per task, indexed like
/// [`GroundedModel::task_index`]; an empty set means no finite tree exists.
pub fn decomposition_costs(
    model: &GroundedModel,
    primitive_cost: Option<u64>,
) -> Vec<BTreeSet<u64>> {
    let nops = model.operators.len();
    let mut sets: Vec<Option<BTreeSet<u64>>> = vec![None; model.num_tasks()];
    for (i, op) in model.operators.iter().enumerate() {
        let c = if op.synthetic {
            0
        } else {
            primitive_cost.unwrap_or(op.cost as u64)
        };
        sets[i] = Some(BTreeSet::from([c]));
    }
    fn visit(model: &GroundedModel, nops: usize, c: usize, sets: &mut Vec<Option<BTreeSet<u64>>>) {
        if sets[nops + c].is_some() {
            return;
        }
        let mut all = BTreeSet::new();
        for &m in &model.compound_tasks[c].methods {
            let mut sums = BTreeSet::from([0u64]);
            for &s in &model.methods[m as usize].subtasks {
                let i = model.task_index(s);
                if let TaskRef::Compound(sc) = s {
                    visit(model, nops, sc as usize, sets);
                }
                let sub = sets[i].as_ref().unwrap();
                sums = sums
                    .iter()
                    .flat_map(|a| sub.iter().map(move |b| a + b))
                    .collect();
            }
            all.extend(sums);
        }
        sets[nops + c] = Some(all);
    }
    for c in 0..model.compound_tasks.len() {
        visit(model, nops, c, &mut sets);
    }
    sets.into_iter().map(Option::unwrap).collect()
}
