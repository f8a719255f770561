//! Random micro-domains: at most three objects and three predicates.
//!
//! A [`Micro`] is kept in structured form so oracles can interpret it
//! directly; [`Micro::domain_text`] and [`Micro::problem_text`] render the
//! same instance as HDDL for the parser.

use std::fmt::Write;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Declared types: `object` is the root, `a - object`, `b - a`.
pub const TYPES: [&str; 3] = ["object", "a", "b"];

/// `ty` accepts objects of type `obj_ty`.
pub fn accepts(ty: usize, obj_ty: usize) -> bool {
    match ty {
        0 => true,
        1 => obj_ty >= 1,
        _ => obj_ty == 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lit {
    /// `None` is equality.
    pub pred: Option<usize>,
    /// Parameter indices.
    pub args: Vec<usize>,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eff {
    pub pred: usize,
    pub args: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Callee {
    Action(usize),
    Task(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub callee: Callee,
    /// Parameter indices for method subtasks, object indices in the root network.
    pub args: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub params: Vec<usize>,
    pub pre: Vec<Lit>,
    pub add: Vec<Eff>,
    pub del: Vec<Eff>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub params: Vec<usize>,
    pub task: usize,
    /// The task's arguments are the first `task_arity` parameters.
    pub task_arity: usize,
    pub pre: Vec<Lit>,
    pub subtasks: Vec<Call>,
}

/// Atom over object indices.
pub type GAtom = (usize, Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Micro {
    pub pred_arity: Vec<usize>,
    pub actions: Vec<ActionDef>,
    pub task_arity: Vec<usize>,
    pub methods: Vec<MethodDef>,
    /// Object types as indices into [`TYPES`].
    pub objects: Vec<usize>,
    pub init: Vec<GAtom>,
    pub goal: Vec<GAtom>,
    pub network: Vec<Call>,
}

pub fn pred_name(p: usize) -> String {
    format!("p{p}")
}
pub fn action_name(a: usize) -> String {
    format!("act{a}")
}
pub fn task_name(t: usize) -> String {
    format!("t{t}")
}
pub fn method_name(m: usize) -> String {
    format!("m{m}")
}
pub fn object_name(o: usize) -> String {
    format!("o{o}")
}

/// `name[o0,o1]` for a call or atom over object indices.
pub fn call_name(name: &str, args: &[usize]) -> String {
    let args: Vec<String> = args.iter().map(|&o| object_name(o)).collect();
    format!("{name}[{}]", args.join(","))
}

fn random_lits(rng: &mut StdRng, pred_arity: &[usize], nparams: usize, max: usize) -> Vec<Lit> {
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(0..=max) {
        if nparams >= 2 && rng.gen_bool(0.15) {
            let x = rng.gen_range(0..nparams);
            let y = rng.gen_range(0..nparams);
            out.push(Lit {
                pred: None,
                args: vec![x, y],
                positive: rng.gen_bool(0.3),
            });
            continue;
        }
        let fits: Vec<usize> = (0..pred_arity.len())
            .filter(|&p| pred_arity[p] == 0 || nparams > 0)
            .collect();
        if fits.is_empty() {
            break;
        }
        let p = fits[rng.gen_range(0..fits.len())];
        let args = (0..pred_arity[p])
            .map(|_| rng.gen_range(0..nparams))
            .collect();
        out.push(Lit {
            pred: Some(p),
            args,
            positive: rng.gen_bool(0.7),
        });
    }
    out
}

fn random_effs(rng: &mut StdRng, pred_arity: &[usize], nparams: usize, max: usize) -> Vec<Eff> {
    random_lits(rng, pred_arity, nparams, max)
        .into_iter()
        .filter_map(|l| l.pred.map(|pred| Eff { pred, args: l.args }))
        .collect()
}

impl Micro {
    /// A reproducible random instance.
    pub fn random(seed: u64) -> Micro {
        let mut rng = StdRng::seed_from_u64(seed);
        let pred_arity: Vec<usize> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(0..=2))
            .collect();
        let actions: Vec<ActionDef> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let params: Vec<usize> = (0..rng.gen_range(0..=2))
                    .map(|_| rng.gen_range(0..3))
                    .collect();
                let n = params.len();
                ActionDef {
                    pre: random_lits(&mut rng, &pred_arity, n, 2),
                    add: random_effs(&mut rng, &pred_arity, n, 2),
                    del: random_effs(&mut rng, &pred_arity, n, 2),
                    params,
                }
            })
            .collect();
        let task_arity: Vec<usize> = (0..rng.gen_range(1..=2))
            .map(|_| rng.gen_range(0..=1))
            .collect();
        let mut methods = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let task = rng.gen_range(0..task_arity.len());
            let k = task_arity[task];
            let params: Vec<usize> = (0..k + rng.gen_range(0..=1))
                .map(|_| rng.gen_range(0..3))
                .collect();
            let n = params.len();
            let mut subtasks = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                let callee = if rng.gen_bool(0.65) {
                    Callee::Action(rng.gen_range(0..actions.len()))
                } else {
                    Callee::Task(rng.gen_range(0..task_arity.len()))
                };
                let arity = match callee {
                    Callee::Action(a) => actions[a].params.len(),
                    Callee::Task(t) => task_arity[t],
                };
                if arity > 0 && n == 0 {
                    continue;
                }
                subtasks.push(Call {
                    callee,
                    args: (0..arity).map(|_| rng.gen_range(0..n)).collect(),
                });
            }
            methods.push(MethodDef {
                pre: random_lits(&mut rng, &pred_arity, n, 2),
                params,
                task,
                task_arity: k,
                subtasks,
            });
        }
        let objects: Vec<usize> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(0..3))
            .collect();
        let atoms = all_atoms(&pred_arity, objects.len());
        let init = atoms
            .iter()
            .filter(|_| rng.gen_bool(0.4))
            .cloned()
            .collect();
        let goal = if rng.gen_bool(0.5) {
            Vec::new()
        } else {
            atoms
                .iter()
                .filter(|_| rng.gen_bool(0.25))
                .take(2)
                .cloned()
                .collect()
        };
        let network = (0..rng.gen_range(1..=2))
            .map(|_| {
                let callee = if rng.gen_bool(0.85) {
                    Callee::Task(rng.gen_range(0..task_arity.len()))
                } else {
                    Callee::Action(rng.gen_range(0..actions.len()))
                };
                let arity = match callee {
                    Callee::Action(a) => actions[a].params.len(),
                    Callee::Task(t) => task_arity[t],
                };
                Call {
                    callee,
                    args: (0..arity)
                        .map(|_| rng.gen_range(0..objects.len()))
                        .collect(),
                }
            })
            .collect();
        Micro {
            pred_arity,
            actions,
            task_arity,
            methods,
            objects,
            init,
            goal,
            network,
        }
    }

    pub fn domain_text(&self) -> String {
        let mut s = String::new();
        s.push_str("(define (domain micro)\n");
        s.push_str("  (:requirements :typing :hierarchy :negative-preconditions :method-preconditions :equality)\n");
        s.push_str("  (:types a - object b - a)\n  (:predicates");
        for (p, &k) in self.pred_arity.iter().enumerate() {
            let vars: Vec<String> = (0..k).map(|i| format!("?x{i}")).collect();
            if k == 0 {
                write!(s, " ({})", pred_name(p)).unwrap();
            } else {
                write!(s, " ({} {} - object)", pred_name(p), vars.join(" ")).unwrap();
            }
        }
        s.push_str(")\n");
        for (t, &k) in self.task_arity.iter().enumerate() {
            let ps: Vec<String> = (0..k).map(|i| format!("?x{i} - object")).collect();
            writeln!(
                s,
                "  (:task {} :parameters ({}))",
                task_name(t),
                ps.join(" ")
            )
            .unwrap();
        }
        for (i, m) in self.methods.iter().enumerate() {
            let targs: Vec<String> = (0..m.task_arity).map(|i| format!(" ?x{i}")).collect();
            writeln!(s, "  (:method {}", method_name(i)).unwrap();
            writeln!(s, "    :parameters ({})", params(&m.params)).unwrap();
            writeln!(s, "    :task ({}{})", task_name(m.task), targs.concat()).unwrap();
            writeln!(s, "    :precondition {}", conj(&m.pre)).unwrap();
            let subs: Vec<String> = m
                .subtasks
                .iter()
                .enumerate()
                .map(|(j, c)| format!("(s{j} ({}{}))", callee_name(c.callee), vars(&c.args)))
                .collect();
            writeln!(s, "    :ordered-subtasks (and {}))", subs.join(" ")).unwrap();
        }
        for (i, a) in self.actions.iter().enumerate() {
            writeln!(s, "  (:action {}", action_name(i)).unwrap();
            writeln!(s, "    :parameters ({})", params(&a.params)).unwrap();
            writeln!(s, "    :precondition {}", conj(&a.pre)).unwrap();
            let effs: Vec<String> = a
                .add
                .iter()
                .map(|e| format!("({}{})", pred_name(e.pred), vars(&e.args)))
                .chain(
                    a.del
                        .iter()
                        .map(|e| format!("(not ({}{}))", pred_name(e.pred), vars(&e.args))),
                )
                .collect();
            writeln!(s, "    :effect (and {}))", effs.join(" ")).unwrap();
        }
        s.push_str(")\n");
        s
    }

    pub fn problem_text(&self) -> String {
        let mut s = String::new();
        s.push_str("(define (problem micro-p)\n  (:domain micro)\n  (:objects");
        for (o, &t) in self.objects.iter().enumerate() {
            write!(s, " {} - {}", object_name(o), TYPES[t]).unwrap();
        }
        s.push_str(")\n");
        let tn: Vec<String> = self
            .network
            .iter()
            .enumerate()
            .map(|(j, c)| format!("(n{j} ({}{}))", callee_name(c.callee), objs(&c.args)))
            .collect();
        writeln!(
            s,
            "  (:htn :parameters () :ordered-subtasks (and {}))",
            tn.join(" ")
        )
        .unwrap();
        let init: Vec<String> = self
            .init
            .iter()
            .map(|(p, a)| format!("({}{})", pred_name(*p), objs(a)))
            .collect();
        writeln!(s, "  (:init {})", init.join(" ")).unwrap();
        if !self.goal.is_empty() {
            let g: Vec<String> = self
                .goal
                .iter()
                .map(|(p, a)| format!("({}{})", pred_name(*p), objs(a)))
                .collect();
            writeln!(s, "  (:goal (and {}))", g.join(" ")).unwrap();
        }
        s.push_str(")\n");
        s
    }

    /// Objects accepted by a parameter of type `ty`.
    pub fn members(&self, ty: usize) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&o| accepts(ty, self.objects[o]))
            .collect()
    }

    /// Every type-correct binding of `params`.
    pub fn bindings(&self, params: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &ty in params {
            let members = self.members(ty);
            out = out
                .into_iter()
                .flat_map(|b| {
                    members.iter().map(move |&o| {
                        let mut b = b.clone();
                        b.push(o);
                        b
                    })
                })
                .collect();
        }
        out
    }
}

/// Every atom over `nobjects` objects.
pub fn all_atoms(pred_arity: &[usize], nobjects: usize) -> Vec<GAtom> {
    let mut out = Vec::new();
    for (p, &k) in pred_arity.iter().enumerate() {
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (0..nobjects).map(move |o| {
                        let mut t = t.clone();
                        t.push(o);
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| (p, t)));
    }
    out
}

fn callee_name(c: Callee) -> String {
    match c {
        Callee::Action(a) => action_name(a),
        Callee::Task(t) => task_name(t),
    }
}

fn params(types: &[usize]) -> String {
    let ps: Vec<String> = types
        .iter()
        .enumerate()
        .map(|(i, &t)| format!("?x{i} - {}", TYPES[t]))
        .collect();
    ps.join(" ")
}

fn vars(args: &[usize]) -> String {
    args.iter().map(|i| format!(" ?x{i}")).collect()
}

fn objs(args: &[usize]) -> String {
    args.iter()
        .map(|&o| format!(" {}", object_name(o)))
        .collect()
}

fn conj(lits: &[Lit]) -> String {
    let parts: Vec<String> = lits
        .iter()
        .map(|l| {
            let atom = match l.pred {
                Some(p) => format!("({}{})", pred_name(p), vars(&l.args)),
                None => format!("(={})", vars(&l.args)),
            };
            if l.positive {
                atom
            } else {
                format!("(not {atom})")
            }
        })
        .collect();
    format!("(and {})", parts.join(" "))
}
