use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::{
    Fact, GroundCompoundTask, GroundMethod, GroundOperator, GroundedModel, StateBitset, TaskRef,
    MPREC_PREFIX,
};
use crate::hddl::{LiftedDomain, LiftedProblem, Literal, Term, TypedParam, ROOT_TYPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    /// Drop operators and methods unreachable under the delete relaxation.
    pub relaxed_pruning: bool,
    /// Compile away predicates that no action changes, and facts that
    /// are true initially and never deleted.
    pub strip_static: bool,
    /// Upper bound on grounded atoms plus operator and method instances.
    pub instantiation_cap: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            relaxed_pruning: true,
            strip_static: true,
            instantiation_cap: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("trivially unsolvable: {0}")]
    TriviallyUnsolvable(String),
    #[error("grounding exceeded the instantiation cap of {cap}")]
    CapExceeded { cap: usize },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy)]
enum Arg {
    Param(usize),
    Obj(u32),
}

struct CLit {
    /// `None` is the built-in equality predicate.
    pred: Option<usize>,
    args: Vec<Arg>,
    positive: bool,
}

/// Literals of one schema, split by whether they are decided at grounding time.
struct Compiled {
    fixed: Vec<CLit>,
    dynamic: Vec<CLit>,
}

struct Inst {
    args: Vec<u32>,
    pos: Vec<u32>,
    neg: Vec<u32>,
}

struct Action {
    schema: usize,
    args: Vec<u32>,
    pos: Vec<u32>,
    neg: Vec<u32>,
    add: Vec<u32>,
    del: Vec<u32>,
}

struct Method {
    schema: usize,
    args: Vec<u32>,
    task: usize,
    subs: Vec<Sub>,
    pos: Vec<u32>,
    neg: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sub {
    Prim(usize),
    Comp(usize),
}

struct Grounder<'a> {
    dom: &'a LiftedDomain,
    opts: GroundOptions,
    objects: Vec<String>,
    obj_index: HashMap<String, u32>,
    by_type: HashMap<String, Vec<u32>>,
    pred_index: HashMap<String, usize>,
    static_pred: Vec<bool>,
    init: HashSet<Vec<u32>>,
    atoms: Vec<Vec<u32>>,
    atom_index: HashMap<Vec<u32>, u32>,
    instances: usize,
}

/// Grounds `problem` against `domain`.
pub fn ground(
    domain: &LiftedDomain,
    problem: &LiftedProblem,
    opts: &GroundOptions,
) -> Result<GroundedModel, GroundError> {
    Grounder::new(domain, problem, *opts)?.run(problem)
}

impl<'a> Grounder<'a> {
    fn new(
        dom: &'a LiftedDomain,
        prob: &LiftedProblem,
        opts: GroundOptions,
    ) -> Result<Self, GroundError> {
        let mut objects = Vec::new();
        let mut obj_index = HashMap::new();
        let mut obj_type = Vec::new();
        for (name, ty) in dom.constants.iter().chain(prob.objects.iter()) {
            if obj_index.contains_key(name) {
                continue;
            }
            obj_index.insert(name.clone(), objects.len() as u32);
            objects.push(name.clone());
            obj_type.push(ty.clone());
        }
        let mut by_type: HashMap<String, Vec<u32>> = HashMap::new();
        let type_names = dom.types.iter().map(|t| t.name.as_str()).chain([ROOT_TYPE]);
        for t in type_names {
            let members = (0..objects.len())
                .filter(|&o| dom.is_subtype(&obj_type[o], t))
                .map(|o| o as u32)
                .collect();
            by_type.insert(t.to_owned(), members);
        }
        let pred_index: HashMap<String, usize> = dom
            .predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), i))
            .collect();
        let mut static_pred = vec![opts.strip_static; dom.predicates.len()];
        for a in &dom.actions {
            for x in a.add.iter().chain(a.del.iter()) {
                if let Some(&i) = pred_index.get(&x.predicate) {
                    static_pred[i] = false;
                }
            }
        }
        let mut g = Grounder {
            dom,
            opts,
            objects,
            obj_index,
            by_type,
            pred_index,
            static_pred,
            init: HashSet::new(),
            atoms: Vec::new(),
            atom_index: HashMap::new(),
            instances: 0,
        };
        for a in &prob.init {
            let key = g.ground_key(&a.predicate, &a.args)?;
            g.init.insert(key);
        }
        Ok(g)
    }

    fn ground_key(&self, pred: &str, args: &[String]) -> Result<Vec<u32>, GroundError> {
        let p = *self
            .pred_index
            .get(pred)
            .ok_or_else(|| GroundError::Invalid(format!("undeclared predicate {pred}")))?;
        let mut key = vec![p as u32];
        for a in args {
            key.push(self.object(a)?);
        }
        Ok(key)
    }

    fn object(&self, name: &str) -> Result<u32, GroundError> {
        self.obj_index
            .get(name)
            .copied()
            .ok_or_else(|| GroundError::Invalid(format!("undeclared object {name}")))
    }

    fn bump(&mut self) -> Result<(), GroundError> {
        self.instances += 1;
        if self.instances + self.atoms.len() > self.opts.instantiation_cap {
            return Err(GroundError::CapExceeded {
                cap: self.opts.instantiation_cap,
            });
        }
        Ok(())
    }

    fn intern(&mut self, key: Vec<u32>) -> Result<u32, GroundError> {
        if let Some(&i) = self.atom_index.get(&key) {
            return Ok(i);
        }
        let i = self.atoms.len() as u32;
        self.atoms.push(key.clone());
        self.atom_index.insert(key, i);
        if self.instances + self.atoms.len() > self.opts.instantiation_cap {
            return Err(GroundError::CapExceeded {
                cap: self.opts.instantiation_cap,
            });
        }
        Ok(i)
    }

    fn arg(&self, params: &[TypedParam], t: &Term) -> Result<Arg, GroundError> {
        match t {
            Term::Var(v) => params
                .iter()
                .position(|p| &p.name == v)
                .map(Arg::Param)
                .ok_or_else(|| GroundError::Invalid(format!("undeclared variable {v}"))),
            Term::Const(c) => Ok(Arg::Obj(self.object(c)?)),
        }
    }

    fn compile(&self, params: &[TypedParam], lits: &[Literal]) -> Result<Compiled, GroundError> {
        let mut out = Compiled {
            fixed: Vec::new(),
            dynamic: Vec::new(),
        };
        for l in lits {
            let args = l
                .atom
                .args
                .iter()
                .map(|t| self.arg(params, t))
                .collect::<Result<Vec<_>, _>>()?;
            let pred = if l.atom.is_equality() {
                None
            } else {
                Some(self.pred_index[&l.atom.predicate])
            };
            let lit = CLit {
                pred,
                args,
                positive: l.positive,
            };
            match pred {
                None => out.fixed.push(lit),
                Some(p) if self.static_pred[p] => out.fixed.push(lit),
                Some(_) => out.dynamic.push(lit),
            }
        }
        Ok(out)
    }

    fn key(pred: usize, args: &[Arg], binding: &[u32]) -> Vec<u32> {
        let mut k = Vec::with_capacity(args.len() + 1);
        k.push(pred as u32);
        k.extend(args.iter().map(|a| match *a {
            Arg::Param(i) => binding[i],
            Arg::Obj(o) => o,
        }));
        k
    }

    fn holds_fixed(&self, lit: &CLit, binding: &[u32]) -> bool {
        let val = |a: &Arg| match *a {
            Arg::Param(i) => binding[i],
            Arg::Obj(o) => o,
        };
        let truth = match lit.pred {
            None => val(&lit.args[0]) == val(&lit.args[1]),
            Some(p) => self.init.contains(&Self::key(p, &lit.args, binding)),
        };
        truth == lit.positive
    }

    /// All type-correct bindings of `params` that agree with `fixed_vals`
    /// and satisfy the statically decided literals, each with its dynamic
    /// precondition atoms interned.
    fn enumerate(
        &mut self,
        params: &[TypedParam],
        fixed_vals: &[Option<u32>],
        c: &Compiled,
    ) -> Result<Vec<Inst>, GroundError> {
        let n = params.len();
        let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (i, l) in c.fixed.iter().enumerate() {
            let level = l
                .args
                .iter()
                .filter_map(|a| match a {
                    Arg::Param(p) => Some(p + 1),
                    Arg::Obj(_) => None,
                })
                .max()
                .unwrap_or(0);
            ready[level].push(i);
        }
        if !ready[0].iter().all(|&i| self.holds_fixed(&c.fixed[i], &[])) {
            return Ok(Vec::new());
        }
        let mut domains = Vec::with_capacity(n);
        for (i, p) in params.iter().enumerate() {
            let members = self.by_type.get(&p.ty).map(Vec::as_slice).unwrap_or(&[]);
            let d: Vec<u32> = match fixed_vals.get(i).copied().flatten() {
                Some(v) if members.contains(&v) => vec![v],
                Some(_) => Vec::new(),
                None => members.to_vec(),
            };
            if d.is_empty() {
                return Ok(Vec::new());
            }
            domains.push(d);
        }
        let mut found = Vec::new();
        let mut binding = vec![0u32; n];
        let mut cursor = vec![0usize; n];
        let mut level = 0usize;
        if n == 0 {
            found.push(Vec::new());
        } else {
            loop {
                if cursor[level] == domains[level].len() {
                    if level == 0 {
                        break;
                    }
                    cursor[level] = 0;
                    level -= 1;
                    cursor[level] += 1;
                    continue;
                }
                binding[level] = domains[level][cursor[level]];
                let ok = ready[level + 1]
                    .iter()
                    .all(|&i| self.holds_fixed(&c.fixed[i], &binding));
                if !ok {
                    cursor[level] += 1;
                } else if level + 1 == n {
                    found.push(binding.clone());
                    cursor[level] += 1;
                } else {
                    level += 1;
                }
            }
        }
        let mut out = Vec::with_capacity(found.len());
        for args in found {
            self.bump()?;
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for l in &c.dynamic {
                let a = self.intern(Self::key(l.pred.unwrap(), &l.args, &args))?;
                if l.positive {
                    pos.push(a)
                } else {
                    neg.push(a)
                }
            }
            sort_dedup(&mut pos);
            sort_dedup(&mut neg);
            if pos.iter().any(|a| neg.binary_search(a).is_ok()) {
                continue;
            }
            out.push(Inst { args, pos, neg });
        }
        Ok(out)
    }

    fn run(mut self, prob: &LiftedProblem) -> Result<GroundedModel, GroundError> {
        let dom = self.dom;

        // Actions, bottom-up.
        let mut actions: Vec<Action> = Vec::new();
        let mut action_index: HashMap<(usize, Vec<u32>), usize> = HashMap::new();
        for (si, schema) in dom.actions.iter().enumerate() {
            let c = self.compile(&schema.params, &schema.precondition)?;
            let effect = |g: &Self,
                          atoms: &[crate::hddl::Atom]|
             -> Result<Vec<(usize, Vec<Arg>)>, GroundError> {
                atoms
                    .iter()
                    .map(|a| {
                        let args = a
                            .args
                            .iter()
                            .map(|t| g.arg(&schema.params, t))
                            .collect::<Result<_, _>>()?;
                        Ok((g.pred_index[&a.predicate], args))
                    })
                    .collect()
            };
            let adds = effect(&self, &schema.add)?;
            let dels = effect(&self, &schema.del)?;
            for inst in self.enumerate(&schema.params, &[], &c)? {
                let mut add = Vec::new();
                for (p, args) in &adds {
                    add.push(self.intern(Self::key(*p, args, &inst.args))?);
                }
                let mut del = Vec::new();
                for (p, args) in &dels {
                    del.push(self.intern(Self::key(*p, args, &inst.args))?);
                }
                sort_dedup(&mut add);
                sort_dedup(&mut del);
                del.retain(|d| add.binary_search(d).is_err());
                action_index.insert((si, inst.args.clone()), actions.len());
                actions.push(Action {
                    schema: si,
                    args: inst.args,
                    pos: inst.pos,
                    neg: inst.neg,
                    add,
                    del,
                });
            }
        }

        // Goal and initial atoms over dynamic predicates.
        let mut goal_atoms = Vec::new();
        for a in &prob.goal {
            let key = self.ground_key(&a.predicate, &a.args)?;
            if self.static_pred[key[0] as usize] {
                if !self.init.contains(&key) {
                    return Err(GroundError::TriviallyUnsolvable(format!(
                        "goal {} can never hold",
                        self.atom_name(&key)
                    )));
                }
                continue;
            }
            goal_atoms.push(self.intern(key)?);
        }
        sort_dedup(&mut goal_atoms);
        let init_keys: Vec<Vec<u32>> = self
            .init
            .iter()
            .filter(|k| !self.static_pred[k[0] as usize])
            .cloned()
            .collect();
        for k in init_keys {
            self.intern(k)?;
        }
        let natoms = self.atoms.len();
        let in_init: Vec<bool> = self.atoms.iter().map(|k| self.init.contains(k)).collect();

        let (reached, deleted) = if self.opts.relaxed_pruning {
            relaxed_reachability(&actions, &in_init)
        } else {
            (vec![true; actions.len()], vec![true; natoms])
        };
        let reached_atoms: Vec<bool> = {
            let mut r = in_init.clone();
            for (a, ok) in actions.iter().zip(&reached) {
                if *ok {
                    for &x in &a.add {
                        r[x as usize] = true;
                    }
                }
            }
            if !self.opts.relaxed_pruning {
                r.iter_mut().for_each(|x| *x = true);
            }
            r
        };
        if let Some(&g) = goal_atoms.iter().find(|&&g| !reached_atoms[g as usize]) {
            return Err(GroundError::TriviallyUnsolvable(format!(
                "goal {} is unreachable",
                self.atom_name(&self.atoms[g as usize].clone())
            )));
        }
        // Atoms first interned by a method precondition are beyond these
        // tables: false initially and touched by no action.
        let relaxed_ok = |pos: &[u32], neg: &[u32]| {
            pos.iter()
                .all(|&a| reached_atoms.get(a as usize).copied().unwrap_or(false))
                && neg.iter().all(|&a| {
                    !in_init.get(a as usize).copied().unwrap_or(false) || deleted[a as usize]
                })
        };

        // Compound tasks and methods, top-down from the initial network.
        let mut tasks: Vec<(usize, Vec<u32>)> = Vec::new();
        let mut task_index: HashMap<(usize, Vec<u32>), usize> = HashMap::new();
        let mut methods: Vec<Method> = Vec::new();
        let mut queue = VecDeque::new();
        let mut root = Vec::new();
        for call in &prob.initial_network {
            let args = call
                .args
                .iter()
                .map(|a| self.object(a))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(si) = dom.actions.iter().position(|a| a.name == call.name) {
                match action_index.get(&(si, args)) {
                    Some(&i) if reached[i] => root.push(Sub::Prim(i)),
                    _ => {
                        return Err(GroundError::TriviallyUnsolvable(format!(
                            "initial task ({}) is never applicable",
                            call_text(&call.name, &call.args)
                        )))
                    }
                }
            } else if let Some(si) = dom.tasks.iter().position(|t| t.name == call.name) {
                let i = *task_index.entry((si, args.clone())).or_insert_with(|| {
                    tasks.push((si, args));
                    queue.push_back(tasks.len() - 1);
                    tasks.len() - 1
                });
                root.push(Sub::Comp(i));
            } else {
                return Err(GroundError::Invalid(format!(
                    "undeclared task {}",
                    call.name
                )));
            }
        }
        let method_schemas: Vec<(usize, Compiled)> = dom
            .methods
            .iter()
            .map(|m| {
                let ti = dom
                    .tasks
                    .iter()
                    .position(|t| t.name == m.task.name)
                    .ok_or_else(|| {
                        GroundError::Invalid(format!(
                            "method {} decomposes undeclared task",
                            m.name
                        ))
                    })?;
                Ok((ti, self.compile(&m.params, &m.precondition)?))
            })
            .collect::<Result<_, GroundError>>()?;
        while let Some(ti) = queue.pop_front() {
            let (tschema, targs) = tasks[ti].clone();
            for (mi, m) in dom.methods.iter().enumerate() {
                if method_schemas[mi].0 != tschema {
                    continue;
                }
                let mut fixed = vec![None; m.params.len()];
                let mut consistent = true;
                for (t, &v) in m.task.args.iter().zip(&targs) {
                    match self.arg(&m.params, t)? {
                        Arg::Param(p) => match fixed[p] {
                            Some(w) if w != v => consistent = false,
                            _ => fixed[p] = Some(v),
                        },
                        Arg::Obj(o) => consistent &= o == v,
                    }
                }
                if !consistent {
                    continue;
                }
                'inst: for inst in self.enumerate(&m.params, &fixed, &method_schemas[mi].1)? {
                    if self.opts.relaxed_pruning && !relaxed_ok(&inst.pos, &inst.neg) {
                        continue;
                    }
                    let mut subs = Vec::with_capacity(m.subtasks.len());
                    for st in &m.subtasks {
                        let args: Vec<u32> = st
                            .call
                            .args
                            .iter()
                            .map(|t| match self.arg(&m.params, t) {
                                Ok(Arg::Param(p)) => Ok(inst.args[p]),
                                Ok(Arg::Obj(o)) => Ok(o),
                                Err(e) => Err(e),
                            })
                            .collect::<Result<_, _>>()?;
                        if let Some(si) = dom.actions.iter().position(|a| a.name == st.call.name) {
                            match action_index.get(&(si, args)) {
                                Some(&i) if reached[i] => subs.push(Sub::Prim(i)),
                                _ => continue 'inst,
                            }
                        } else {
                            let si = dom
                                .tasks
                                .iter()
                                .position(|t| t.name == st.call.name)
                                .ok_or_else(|| {
                                    GroundError::Invalid(format!(
                                        "undeclared task {}",
                                        st.call.name
                                    ))
                                })?;
                            let i = *task_index.entry((si, args.clone())).or_insert_with(|| {
                                tasks.push((si, args));
                                queue.push_back(tasks.len() - 1);
                                tasks.len() - 1
                            });
                            subs.push(Sub::Comp(i));
                        }
                    }
                    methods.push(Method {
                        schema: mi,
                        args: inst.args,
                        task: ti,
                        subs,
                        pos: inst.pos,
                        neg: inst.neg,
                    });
                }
            }
        }

        let natoms = self.atoms.len();
        let mut in_init = in_init;
        in_init.resize(natoms, false);

        // Bottom-up productivity: a task is productive if some method has
        // only primitive or productive subtasks.
        let mut productive = vec![false; tasks.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for m in &methods {
                if !productive[m.task]
                    && m.subs.iter().all(|s| match *s {
                        Sub::Prim(_) => true,
                        Sub::Comp(c) => productive[c],
                    })
                {
                    productive[m.task] = true;
                    changed = true;
                }
            }
        }
        let method_ok = |m: &Method| {
            productive[m.task]
                && m.subs
                    .iter()
                    .all(|s| !matches!(*s, Sub::Comp(c) if !productive[c]))
        };
        if let Some(Sub::Comp(c)) = root
            .iter()
            .find(|s| matches!(**s, Sub::Comp(c) if !productive[c]))
        {
            let (si, args) = &tasks[*c];
            return Err(GroundError::TriviallyUnsolvable(format!(
                "initial task ({}) has no executable decomposition",
                self.call_name(&dom.tasks[*si].name, args)
            )));
        }

        // Top-down reachability over the surviving methods.
        let mut by_task: Vec<Vec<usize>> = vec![Vec::new(); tasks.len()];
        for (i, m) in methods.iter().enumerate() {
            if method_ok(m) {
                by_task[m.task].push(i);
            }
        }
        let mut task_id: Vec<Option<u32>> = vec![None; tasks.len()];
        let mut task_order = Vec::new();
        let mut op_used = vec![false; actions.len()];
        let mut queue = VecDeque::new();
        let mut visit = |s: Sub,
                         task_id: &mut Vec<Option<u32>>,
                         queue: &mut VecDeque<usize>,
                         op_used: &mut Vec<bool>| match s {
            Sub::Prim(i) => op_used[i] = true,
            Sub::Comp(c) => {
                if task_id[c].is_none() {
                    task_id[c] = Some(task_order.len() as u32);
                    task_order.push(c);
                    queue.push_back(c);
                }
            }
        };
        for &s in &root {
            visit(s, &mut task_id, &mut queue, &mut op_used);
        }
        let mut method_order = Vec::new();
        while let Some(c) = queue.pop_front() {
            for &mi in &by_task[c] {
                method_order.push(mi);
                for &s in &methods[mi].subs {
                    visit(s, &mut task_id, &mut queue, &mut op_used);
                }
            }
        }
        // Group methods by task id for readable dumps.
        method_order.sort_by_key(|&mi| task_id[methods[mi].task]);

        // Static-true facts among the atoms the kept operators touch.
        let kept_ops: Vec<usize> = (0..actions.len()).filter(|&i| op_used[i]).collect();
        let mut ever_added = vec![false; natoms];
        let mut ever_deleted = vec![false; natoms];
        for &i in &kept_ops {
            for &a in &actions[i].add {
                ever_added[a as usize] = true;
            }
            for &a in &actions[i].del {
                ever_deleted[a as usize] = true;
            }
        }
        let strip = self.opts.strip_static;
        let pos_static = |a: u32| strip && in_init[a as usize] && !ever_deleted[a as usize];
        let neg_static = |a: u32| strip && !in_init[a as usize] && !ever_added[a as usize];

        // Fact table: positive atoms and the complements that are needed.
        let mut pos_used = vec![false; natoms];
        let mut neg_used = vec![false; natoms];
        let mark =
            |pos: &[u32], neg: &[u32], pos_used: &mut Vec<bool>, neg_used: &mut Vec<bool>| {
                for &a in pos {
                    if !pos_static(a) {
                        pos_used[a as usize] = true;
                    }
                }
                for &a in neg {
                    if !neg_static(a) {
                        neg_used[a as usize] = true;
                    }
                }
            };
        for &i in &kept_ops {
            let a = &actions[i];
            mark(&a.pos, &a.neg, &mut pos_used, &mut neg_used);
            for &x in a.add.iter().chain(&a.del) {
                if !pos_static(x) {
                    pos_used[x as usize] = true;
                }
            }
        }
        for &mi in &method_order {
            mark(
                &methods[mi].pos,
                &methods[mi].neg,
                &mut pos_used,
                &mut neg_used,
            );
        }
        for &g in &goal_atoms {
            if !pos_static(g) {
                pos_used[g as usize] = true;
            }
        }
        let mut fact_keys: Vec<(String, bool, u32)> = Vec::new();
        for a in 0..natoms {
            let name = self.atom_name(&self.atoms[a]);
            if neg_used[a] {
                fact_keys.push((name.clone(), true, a as u32));
            }
            if pos_used[a] {
                fact_keys.push((name, false, a as u32));
            }
        }
        fact_keys.sort();
        let nfacts = fact_keys.len();
        let mut pos_fact = vec![None; natoms];
        let mut neg_fact = vec![None; natoms];
        let facts: Vec<Fact> = fact_keys
            .into_iter()
            .enumerate()
            .map(|(id, (name, negated, a))| {
                if negated {
                    neg_fact[a as usize] = Some(id);
                } else {
                    pos_fact[a as usize] = Some(id);
                }
                Fact {
                    id: id as u32,
                    name,
                    negated,
                }
            })
            .collect();
        let bits = |pos: &[u32], neg: &[u32]| {
            StateBitset::from_ids(
                nfacts,
                pos.iter()
                    .filter_map(|&a| pos_fact[a as usize])
                    .chain(neg.iter().filter_map(|&a| neg_fact[a as usize])),
            )
        };

        let mut operators = Vec::new();
        let mut op_id = vec![0u32; actions.len()];
        for &i in &kept_ops {
            let a = &actions[i];
            let id = operators.len() as u32;
            op_id[i] = id;
            operators.push(GroundOperator {
                id,
                name: self.call_name(&dom.actions[a.schema].name, &a.args),
                cost: 1,
                pre: bits(&a.pos, &a.neg),
                // Adding an atom deletes its complement and vice versa.
                add: bits(&a.add, &a.del),
                del: bits(&a.del, &a.add),
                synthetic: false,
            });
        }

        let compound_tasks_base: Vec<GroundCompoundTask> = task_order
            .iter()
            .enumerate()
            .map(|(id, &c)| GroundCompoundTask {
                id: id as u32,
                name: self.call_name(&dom.tasks[tasks[c].0].name, &tasks[c].1),
                methods: Vec::new(),
            })
            .collect();
        let mut compound_tasks = compound_tasks_base;
        let map_sub = |s: &Sub| match *s {
            Sub::Prim(i) => TaskRef::Primitive(op_id[i]),
            Sub::Comp(c) => TaskRef::Compound(task_id[c].expect("reachable subtask")),
        };
        let mut ground_methods = Vec::new();
        for &mi in &method_order {
            let m = &methods[mi];
            let id = ground_methods.len() as u32;
            let name = self.call_name(&dom.methods[m.schema].name, &m.args);
            let pre = bits(&m.pos, &m.neg);
            let mut subtasks = Vec::with_capacity(m.subs.len() + 1);
            let mut precondition_op = None;
            if !pre.is_empty() {
                let oid = operators.len() as u32;
                operators.push(GroundOperator {
                    id: oid,
                    name: format!("{MPREC_PREFIX}{name}"),
                    cost: 0,
                    pre,
                    add: StateBitset::new(nfacts),
                    del: StateBitset::new(nfacts),
                    synthetic: true,
                });
                subtasks.push(TaskRef::Primitive(oid));
                precondition_op = Some(oid);
            }
            subtasks.extend(m.subs.iter().map(map_sub));
            let task = task_id[m.task].expect("reachable task");
            compound_tasks[task as usize].methods.push(id);
            ground_methods.push(GroundMethod {
                id,
                name,
                task,
                subtasks,
                precondition_op,
            });
        }

        let initial_state = StateBitset::from_ids(
            nfacts,
            (0..natoms).flat_map(|a| if in_init[a] { pos_fact[a] } else { neg_fact[a] }),
        );
        let goals = bits(&goal_atoms, &[]);
        let initial_network = root.iter().map(map_sub).collect();
        Ok(GroundedModel {
            domain_name: dom.name.clone(),
            problem_name: prob.name.clone(),
            facts,
            operators,
            compound_tasks,
            methods: ground_methods,
            initial_state,
            goals,
            initial_network,
        })
    }

    fn call_name(&self, name: &str, args: &[u32]) -> String {
        let args: Vec<&str> = args
            .iter()
            .map(|&o| self.objects[o as usize].as_str())
            .collect();
        format!("{name}[{}]", args.join(","))
    }

    fn atom_name(&self, key: &[u32]) -> String {
        self.call_name(&self.dom.predicates[key[0] as usize].name, &key[1..])
    }
}

fn call_text(name: &str, args: &[String]) -> String {
    std::iter::once(name)
        .chain(args.iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ")
}

fn sort_dedup(v: &mut Vec<u32>) {
    v.sort_unstable();
    v.dedup();
}

/// Delete-relaxed reachability from the initial atoms.
///
/// Returns which actions become applicable and which atoms some applicable
/// action deletes. A negative precondition is relaxed-satisfiable when its
/// atom is false initially or gets deleted by a reachable action.
fn relaxed_reachability(actions: &[Action], in_init: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let natoms = in_init.len();
    let mut reached_atom = in_init.to_vec();
    let mut deleted = vec![false; natoms];
    let mut missing = vec![0usize; actions.len()];
    let mut pos_wait: Vec<Vec<usize>> = vec![Vec::new(); natoms];
    let mut neg_wait: Vec<Vec<usize>> = vec![Vec::new(); natoms];
    let mut ready = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        for &p in &a.pos {
            if !reached_atom[p as usize] {
                missing[i] += 1;
                pos_wait[p as usize].push(i);
            }
        }
        for &n in &a.neg {
            if in_init[n as usize] {
                missing[i] += 1;
                neg_wait[n as usize].push(i);
            }
        }
        if missing[i] == 0 {
            ready.push(i);
        }
    }
    let mut reached = vec![false; actions.len()];
    while let Some(i) = ready.pop() {
        if reached[i] {
            continue;
        }
        reached[i] = true;
        for &x in &actions[i].add {
            if !reached_atom[x as usize] {
                reached_atom[x as usize] = true;
                for &w in &pos_wait[x as usize] {
                    missing[w] -= 1;
                    if missing[w] == 0 {
                        ready.push(w);
                    }
                }
            }
        }
        for &x in &actions[i].del {
            if !deleted[x as usize] {
                deleted[x as usize] = true;
                for &w in &neg_wait[x as usize] {
                    missing[w] -= 1;
                    if missing[w] == 0 {
                        ready.push(w);
                    }
                }
            }
        }
    }
    (reached, deleted)
}
