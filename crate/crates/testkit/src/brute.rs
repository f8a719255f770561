//! Brute-force grounding of a [`Micro`] instance.
//!
//! Every schema is instantiated over every type-correct binding and every
//! pruning step is a naive fixpoint over the full instance sets, so the
//! result does not depend on the grounder's top-down instantiation order.

use std::collections::{BTreeMap, BTreeSet};

use htnplan::ground::GroundedModel;

use crate::micro::{
    action_name, call_name, method_name, pred_name, task_name, Callee, GAtom, Lit, Micro,
};

/// What a grounded model must contain, by name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expected {
    /// `(name, negated)`.
    pub facts: BTreeSet<(String, bool)>,
    pub operators: BTreeSet<String>,
    pub tasks: BTreeSet<String>,
    pub methods: BTreeSet<String>,
    /// Methods that keep a precondition check after stripping.
    pub checked_methods: BTreeSet<String>,
}

type TaskKey = (usize, Vec<usize>);
type ActKey = (usize, Vec<usize>);

struct ActInst {
    pos: BTreeSet<GAtom>,
    neg: BTreeSet<GAtom>,
    add: BTreeSet<GAtom>,
    del: BTreeSet<GAtom>,
}

struct MethInst {
    name: String,
    task: TaskKey,
    pos: BTreeSet<GAtom>,
    neg: BTreeSet<GAtom>,
    subs: Vec<Sub>,
}

#[derive(Clone)]
enum Sub {
    Act(ActKey),
    Task(TaskKey),
}

fn atom(pred: usize, args: &[usize], binding: &[usize]) -> GAtom {
    (pred, args.iter().map(|&i| binding[i]).collect())
}

pub fn atom_name(a: &GAtom) -> String {
    call_name(&pred_name(a.0), &a.1)
}

/// `None` when grounding must report the instance as trivially unsolvable.
pub fn ground(m: &Micro, strip_static: bool, relaxed_pruning: bool) -> Option<Expected> {
    let init: BTreeSet<GAtom> = m.init.iter().cloned().collect();
    let mut is_static = vec![strip_static; m.pred_arity.len()];
    for a in &m.actions {
        for e in a.add.iter().chain(&a.del) {
            is_static[e.pred] = false;
        }
    }
    // Literals decided at grounding time hold; the rest split into pos/neg.
    let split = |lits: &[Lit], b: &[usize]| -> Option<(BTreeSet<GAtom>, BTreeSet<GAtom>)> {
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for l in lits {
            match l.pred {
                None => {
                    if (b[l.args[0]] == b[l.args[1]]) != l.positive {
                        return None;
                    }
                }
                Some(p) if is_static[p] => {
                    if init.contains(&atom(p, &l.args, b)) != l.positive {
                        return None;
                    }
                }
                Some(p) => {
                    let x = atom(p, &l.args, b);
                    if l.positive {
                        pos.insert(x);
                    } else {
                        neg.insert(x);
                    }
                }
            }
        }
        if pos.intersection(&neg).next().is_some() {
            return None;
        }
        Some((pos, neg))
    };

    let mut acts: BTreeMap<ActKey, ActInst> = BTreeMap::new();
    for (ai, a) in m.actions.iter().enumerate() {
        for b in m.bindings(&a.params) {
            let Some((pos, neg)) = split(&a.pre, &b) else {
                continue;
            };
            let add: BTreeSet<GAtom> = a.add.iter().map(|e| atom(e.pred, &e.args, &b)).collect();
            let del: BTreeSet<GAtom> = a
                .del
                .iter()
                .map(|e| atom(e.pred, &e.args, &b))
                .filter(|x| !add.contains(x))
                .collect();
            acts.insert((ai, b), ActInst { pos, neg, add, del });
        }
    }

    let mut goals = BTreeSet::new();
    for g in &m.goal {
        if is_static[g.0] {
            if !init.contains(g) {
                return None;
            }
        } else {
            goals.insert(g.clone());
        }
    }

    // Delete-relaxed reachability, one full pass at a time.
    let mut reached: BTreeSet<ActKey> = BTreeSet::new();
    let mut reached_atoms: BTreeSet<GAtom> =
        init.iter().filter(|a| !is_static[a.0]).cloned().collect();
    let mut deleted: BTreeSet<GAtom> = BTreeSet::new();
    if relaxed_pruning {
        loop {
            let mut changed = false;
            for (k, a) in &acts {
                if reached.contains(k) {
                    continue;
                }
                if a.pos.is_subset(&reached_atoms)
                    && a.neg
                        .iter()
                        .all(|x| !init.contains(x) || deleted.contains(x))
                {
                    reached.insert(k.clone());
                    reached_atoms.extend(a.add.iter().cloned());
                    deleted.extend(a.del.iter().cloned());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !goals.is_subset(&reached_atoms) {
            return None;
        }
    } else {
        reached = acts.keys().cloned().collect();
    }
    let relaxed_ok = |pos: &BTreeSet<GAtom>, neg: &BTreeSet<GAtom>| {
        !relaxed_pruning
            || (pos.is_subset(&reached_atoms)
                && neg.iter().all(|x| !init.contains(x) || deleted.contains(x)))
    };

    let mut methods = Vec::new();
    for (mi, md) in m.methods.iter().enumerate() {
        'bind: for b in m.bindings(&md.params) {
            let Some((pos, neg)) = split(&md.pre, &b) else {
                continue;
            };
            if !relaxed_ok(&pos, &neg) {
                continue;
            }
            let mut subs = Vec::new();
            for c in &md.subtasks {
                let args: Vec<usize> = c.args.iter().map(|&i| b[i]).collect();
                match c.callee {
                    Callee::Action(a) => {
                        if !reached.contains(&(a, args.clone())) {
                            continue 'bind;
                        }
                        subs.push(Sub::Act((a, args)));
                    }
                    Callee::Task(t) => subs.push(Sub::Task((t, args))),
                }
            }
            methods.push(MethInst {
                name: call_name(&method_name(mi), &b),
                task: (md.task, b[..md.task_arity].to_vec()),
                pos,
                neg,
                subs,
            });
        }
    }

    let mut root = Vec::new();
    for c in &m.network {
        match c.callee {
            Callee::Action(a) => {
                if !reached.contains(&(a, c.args.clone())) {
                    return None;
                }
                root.push(Sub::Act((a, c.args.clone())));
            }
            Callee::Task(t) => root.push(Sub::Task((t, c.args.clone()))),
        }
    }

    let mut productive: BTreeSet<TaskKey> = BTreeSet::new();
    loop {
        let before = productive.len();
        for mi in &methods {
            if mi.subs.iter().all(|s| match s {
                Sub::Act(_) => true,
                Sub::Task(t) => productive.contains(t),
            }) {
                productive.insert(mi.task.clone());
            }
        }
        if productive.len() == before {
            break;
        }
    }
    let method_ok = |mi: &MethInst| {
        productive.contains(&mi.task)
            && mi.subs.iter().all(|s| match s {
                Sub::Act(_) => true,
                Sub::Task(t) => productive.contains(t),
            })
    };
    if root
        .iter()
        .any(|s| matches!(s, Sub::Task(t) if !productive.contains(t)))
    {
        return None;
    }

    let mut tasks: BTreeSet<TaskKey> = BTreeSet::new();
    let mut ops: BTreeSet<ActKey> = BTreeSet::new();
    let mut kept: Vec<&MethInst> = Vec::new();
    let mut frontier: Vec<Sub> = root;
    while let Some(s) = frontier.pop() {
        match s {
            Sub::Act(a) => {
                ops.insert(a);
            }
            Sub::Task(t) => {
                if !tasks.insert(t.clone()) {
                    continue;
                }
                for mi in methods.iter().filter(|mi| mi.task == t && method_ok(mi)) {
                    kept.push(mi);
                    frontier.extend(mi.subs.iter().cloned());
                }
            }
        }
    }

    let mut ever_added = BTreeSet::new();
    let mut ever_deleted = BTreeSet::new();
    for k in &ops {
        ever_added.extend(acts[k].add.iter().cloned());
        ever_deleted.extend(acts[k].del.iter().cloned());
    }
    let pos_static = |x: &GAtom| strip_static && init.contains(x) && !ever_deleted.contains(x);
    let neg_static = |x: &GAtom| strip_static && !init.contains(x) && !ever_added.contains(x);

    let mut out = Expected::default();
    let mut note = |x: &GAtom, negated: bool| {
        out.facts.insert((atom_name(x), negated));
    };
    for k in &ops {
        let a = &acts[k];
        for x in a.pos.iter().chain(&a.add).chain(&a.del) {
            if !pos_static(x) {
                note(x, false);
            }
        }
        for x in &a.neg {
            if !neg_static(x) {
                note(x, true);
            }
        }
    }
    for mi in &kept {
        for x in &mi.pos {
            if !pos_static(x) {
                note(x, false);
            }
        }
        for x in &mi.neg {
            if !neg_static(x) {
                note(x, true);
            }
        }
    }
    for g in &goals {
        if !pos_static(g) {
            note(g, false);
        }
    }
    out.operators = ops
        .iter()
        .map(|(a, b)| call_name(&action_name(*a), b))
        .collect();
    out.tasks = tasks
        .iter()
        .map(|(t, b)| call_name(&task_name(*t), b))
        .collect();
    for mi in &kept {
        out.methods.insert(mi.name.clone());
        if mi.pos.iter().any(|x| !pos_static(x)) || mi.neg.iter().any(|x| !neg_static(x)) {
            out.checked_methods.insert(mi.name.clone());
        }
    }
    Some(out)
}

/// The same projection of a grounded model, for comparison with [`ground`].
pub fn observed(model: &GroundedModel) -> Expected {
    Expected {
        facts: model
            .facts
            .iter()
            .map(|f| (f.name.clone(), f.negated))
            .collect(),
        operators: model
            .operators
            .iter()
            .filter(|o| !o.synthetic)
            .map(|o| o.name.clone())
            .collect(),
        tasks: model
            .compound_tasks
            .iter()
            .map(|t| t.name.clone())
            .collect(),
        methods: model.methods.iter().map(|m| m.name.clone()).collect(),
        checked_methods: model
            .methods
            .iter()
            .filter(|m| m.precondition_op.is_some())
            .map(|m| m.name.clone())
            .collect(),
    }
}
