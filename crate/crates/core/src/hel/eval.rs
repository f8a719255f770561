use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Zero};

use super::{EvalBuiltin, Expr, HelProgram, InitExpr};
use crate::ground::{fact_holds, GroundedModel};
use crate::heuristic::{infinity_penalty, tdg_fixpoint, HValue, Heuristic};
use crate::search::SearchNode;

/// A value produced by `init`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HelValue {
    Number(HValue),
    FactSet(Vec<u32>),
    /// Per-task cost by [`GroundedModel::task_index`], `∞` clamped.
    CostTable(Vec<i64>),
    /// Per-task match flag by [`GroundedModel::task_index`].
    TaskPattern(Vec<bool>),
}

impl HelValue {
    fn kind(&self) -> &'static str {
        match self {
            HelValue::Number(_) => "a number",
            HelValue::FactSet(_) => "a fact-set",
            HelValue::CostTable(_) => "a cost-table",
            HelValue::TaskPattern(_) => "a task-pattern",
        }
    }
}

/// An initialized HEL program.
pub struct HelHeuristic {
    program: Arc<HelProgram>,
    values: Vec<HelValue>,
    nops: usize,
    warned: bool,
    /// Expression nodes plus the sizes of the fixed fact sets read per
    /// evaluation; the network-dependent part is added per node.
    fixed_cost: u64,
    network_sites: u64,
    last_ops: u64,
    last_bound: u64,
}

fn task_index(nops: usize, t: crate::ground::TaskRef) -> usize {
    match t {
        crate::ground::TaskRef::Primitive(o) => o as usize,
        crate::ground::TaskRef::Compound(c) => nops + c as usize,
    }
}

impl HelHeuristic {
    /// Runs the program's `init` definitions against `model`.
    pub fn new(program: Arc<HelProgram>, model: &GroundedModel) -> Self {
        let penalty = infinity_penalty(model);
        let values: Vec<HelValue> = program
            .defs
            .iter()
            .map(|d| match &d.value {
                InitExpr::Number(n) => HelValue::Number(*n),
                InitExpr::TdgTable {
                    primitive_cost,
                    abstract_init,
                } => {
                    let t = tdg_fixpoint(model, Some(*primitive_cost), *abstract_init);
                    HelValue::CostTable(
                        t.clamped(penalty)
                            .into_iter()
                            .map(|c| i64::try_from(c).unwrap_or(i64::MAX))
                            .collect(),
                    )
                }
                InitExpr::GoalFacts(p) => HelValue::FactSet(
                    model
                        .goals
                        .ones()
                        .filter(|&i| i < model.facts.len())
                        .filter(|&i| !model.facts[i].negated && model.facts[i].predicate() == p)
                        .map(|i| i as u32)
                        .collect(),
                ),
                InitExpr::Facts(p) => HelValue::FactSet(
                    model
                        .facts
                        .iter()
                        .filter(|f| !f.negated && f.predicate() == p)
                        .map(|f| f.id)
                        .collect(),
                ),
                InitExpr::TaskPattern(s) => {
                    let s = s.to_lowercase();
                    let names = model
                        .operators
                        .iter()
                        .map(|o| &o.name)
                        .chain(model.compound_tasks.iter().map(|t| &t.name));
                    HelValue::TaskPattern(names.map(|n| n.to_lowercase().contains(&s)).collect())
                }
            })
            .collect();
        let mut h = HelHeuristic {
            program,
            values,
            nops: model.operators.len(),
            warned: false,
            fixed_cost: 0,
            network_sites: 0,
            last_ops: 0,
            last_bound: 0,
        };
        let (fixed, sites) = h.cost_shape(&h.program.eval.clone());
        h.fixed_cost = fixed;
        h.network_sites = sites;
        h
    }

    pub fn program(&self) -> &HelProgram {
        &self.program
    }

    pub fn value(&self, symbol: &str) -> Option<&HelValue> {
        let i = self.program.defs.iter().position(|d| d.symbol == symbol)?;
        Some(&self.values[i])
    }

    /// Primitive operations performed by the last evaluation.
    pub fn last_op_count(&self) -> u64 {
        self.last_ops
    }

    /// Upper bound on [`last_op_count`](Self::last_op_count) for the last node.
    pub fn last_op_bound(&self) -> u64 {
        self.last_bound
    }

    /// `(expression nodes + Σ|fact sets read|, network-reading call sites)`
    fn cost_shape(&self, e: &Expr) -> (u64, u64) {
        match e {
            Expr::Number(_) | Expr::Symbol(_) => (1, 0),
            Expr::Call(b, args) => {
                let mut fixed = 1;
                let mut sites = 0;
                match b {
                    EvalBuiltin::NetworkCost | EvalBuiltin::PendingCount => sites += 1,
                    EvalBuiltin::CountUnsatisfied
                    | EvalBuiltin::CountTrue
                    | EvalBuiltin::AnyTrue => {
                        if let Expr::Symbol(i) = args[0] {
                            if let HelValue::FactSet(s) = &self.values[i] {
                                fixed += s.len() as u64;
                            }
                        }
                    }
                    _ => {}
                }
                for a in args {
                    let (f, s) = self.cost_shape(a);
                    fixed += f;
                    sites += s;
                }
                (fixed, sites)
            }
        }
    }

    fn num(&self, e: &Expr, node: &SearchNode, ops: &mut u64) -> Result<HValue, String> {
        match self.eval(e, node, ops)? {
            Val::Num(n) => Ok(n),
            other => Err(format!("expected a number, found {}", other.kind())),
        }
    }

    fn eval<'s>(&'s self, e: &Expr, node: &SearchNode, ops: &mut u64) -> Result<Val<'s>, String> {
        *ops += 1;
        let overflow = || "arithmetic overflow".to_string();
        match e {
            Expr::Number(n) => Ok(Val::Num(*n)),
            Expr::Symbol(i) => Ok(match &self.values[*i] {
                HelValue::Number(n) => Val::Num(*n),
                v => Val::Ref(v),
            }),
            Expr::Call(b, args) => {
                use EvalBuiltin::*;
                match b {
                    NetworkCost => {
                        let table = match self.eval(&args[0], node, ops)? {
                            Val::Ref(HelValue::CostTable(t)) => t,
                            v => {
                                return Err(format!(
                                    "network-cost expects a cost-table, found {}",
                                    v.kind()
                                ))
                            }
                        };
                        let mut sum: i64 = 0;
                        for t in &node.network {
                            *ops += 1;
                            sum = sum
                                .checked_add(table[task_index(self.nops, t)])
                                .ok_or_else(overflow)?;
                        }
                        Ok(Val::Num(Ratio::from_integer(sum)))
                    }
                    PendingCount => {
                        let pat = match self.eval(&args[0], node, ops)? {
                            Val::Ref(HelValue::TaskPattern(p)) => p,
                            v => {
                                return Err(format!(
                                    "pending-count expects a task-pattern, found {}",
                                    v.kind()
                                ))
                            }
                        };
                        let mut n = 0i64;
                        for t in &node.network {
                            *ops += 1;
                            n += pat[task_index(self.nops, t)] as i64;
                        }
                        Ok(Val::Num(Ratio::from_integer(n)))
                    }
                    CountUnsatisfied | CountTrue | AnyTrue => {
                        let set = match self.eval(&args[0], node, ops)? {
                            Val::Ref(HelValue::FactSet(s)) => s,
                            v => {
                                return Err(format!(
                                    "{} expects a fact-set, found {}",
                                    b.name(),
                                    v.kind()
                                ))
                            }
                        };
                        *ops += set.len() as u64;
                        let t = set
                            .iter()
                            .filter(|&&f| fact_holds(&node.state, f as usize))
                            .count() as i64;
                        let n = match b {
                            CountUnsatisfied => set.len() as i64 - t,
                            CountTrue => t,
                            _ => (t > 0) as i64,
                        };
                        Ok(Val::Num(Ratio::from_integer(n)))
                    }
                    Add | Mul | Max | Min => {
                        let mut acc = self.num(&args[0], node, ops)?;
                        for a in &args[1..] {
                            let x = self.num(a, node, ops)?;
                            acc = match b {
                                Add => acc.checked_add(&x).ok_or_else(overflow)?,
                                Mul => acc.checked_mul(&x).ok_or_else(overflow)?,
                                Max => acc.max(x),
                                _ => acc.min(x),
                            };
                        }
                        Ok(Val::Num(acc))
                    }
                    Sub => {
                        let a = self.num(&args[0], node, ops)?;
                        let r = match args.get(1) {
                            Some(y) => a.checked_sub(&self.num(y, node, ops)?),
                            None => HValue::zero().checked_sub(&a),
                        };
                        Ok(Val::Num(r.ok_or_else(overflow)?))
                    }
                    Div => {
                        let a = self.num(&args[0], node, ops)?;
                        let d = self.num(&args[1], node, ops)?;
                        if d.is_zero() {
                            return Err("division by zero".into());
                        }
                        Ok(Val::Num(a.checked_div(&d).ok_or_else(overflow)?))
                    }
                    If => {
                        let c = self.num(&args[0], node, ops)?;
                        self.eval(if c.is_zero() { &args[2] } else { &args[1] }, node, ops)
                    }
                }
            }
        }
    }
}

enum Val<'a> {
    Num(HValue),
    Ref(&'a HelValue),
}

impl Val<'_> {
    fn kind(&self) -> &'static str {
        match self {
            Val::Num(_) => "a number",
            Val::Ref(v) => v.kind(),
        }
    }
}

impl Heuristic for HelHeuristic {
    fn evaluate(&mut self, node: &SearchNode) -> Result<HValue, String> {
        let mut ops = 0;
        let r = match self.eval(&self.program.eval, node, &mut ops)? {
            Val::Num(n) => n,
            other => return Err(format!("eval produced {}, not a number", other.kind())),
        };
        self.last_ops = ops;
        self.last_bound = self.fixed_cost + self.network_sites * node.network.len() as u64;
        debug_assert!(
            ops <= self.last_bound,
            "HEL evaluation used {ops} operations, bound {}",
            self.last_bound
        );
        if r < HValue::zero() {
            self.warned = true;
            return Ok(HValue::zero());
        }
        Ok(r)
    }

    fn warned(&self) -> bool {
        self.warned
    }
}
