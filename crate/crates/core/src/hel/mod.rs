//! HEL, a small expression language for heuristics.
//!
//! A program names itself, binds symbols once per model in `init`, and
//! gives one expression that `eval` computes at every node:
//!
//! ```text
//! (heuristic "tdg-plus-goals"
//!   (init
//!     (def c (tdg-table 1 100))
//!     (def g (goal-facts "communicated_soil_data")))
//!   (eval (+ (network-cost c) (* 4 (count-unsatisfied g)))))
//! ```
//!
//! Init builtins ([`INIT_BUILTINS`]) may only appear in `init`, eval
//! builtins ([`EVAL_BUILTINS`]) only in `eval`. Values are exact
//! rationals; fact sets, cost tables and task patterns are frozen after
//! `init`. There is no other way for a program to observe or affect the
//! outside world.

mod eval;
mod parse;

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::sexpr::Pos;

pub use eval::{HelHeuristic, HelValue};
pub use parse::parse;

/// Parses a HEL number literal: an integer, a decimal or a `p/q` fraction.
pub fn parse_number_literal(text: &str) -> Result<Ratio<i64>, String> {
    parse::parse_number(text).unwrap_or_else(|| Err(format!("{text:?} is not a number")))
}

/// Builtins allowed as the value of an `init` definition.
pub const INIT_BUILTINS: [&str; 4] = ["tdg-table", "goal-facts", "facts", "task-pattern"];

/// Builtins allowed inside the `eval` expression.
pub const EVAL_BUILTINS: [&str; 12] = [
    "network-cost",
    "pending-count",
    "count-unsatisfied",
    "count-true",
    "any-true",
    "+",
    "-",
    "*",
    "/",
    "max",
    "min",
    "if",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitBuiltin {
    /// `(tdg-table primitive-cost abstract-init)`
    TdgTable,
    /// `(goal-facts "predicate")`
    GoalFacts,
    /// `(facts "predicate")`
    Facts,
    /// `(task-pattern "substring")`
    TaskPattern,
}

impl InitBuiltin {
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "tdg-table" => InitBuiltin::TdgTable,
            "goal-facts" => InitBuiltin::GoalFacts,
            "facts" => InitBuiltin::Facts,
            "task-pattern" => InitBuiltin::TaskPattern,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        INIT_BUILTINS[self as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalBuiltin {
    NetworkCost,
    PendingCount,
    CountUnsatisfied,
    CountTrue,
    AnyTrue,
    Add,
    Sub,
    Mul,
    Div,
    Max,
    Min,
    If,
}

impl EvalBuiltin {
    pub fn from_name(s: &str) -> Option<Self> {
        use EvalBuiltin::*;
        Some(match s {
            "network-cost" => NetworkCost,
            "pending-count" => PendingCount,
            "count-unsatisfied" => CountUnsatisfied,
            "count-true" => CountTrue,
            "any-true" => AnyTrue,
            "+" => Add,
            "-" => Sub,
            "*" => Mul,
            "/" => Div,
            "max" => Max,
            "min" => Min,
            "if" => If,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        EVAL_BUILTINS[self as usize]
    }

    /// Inclusive bounds on the argument count; `None` is unbounded.
    pub fn arity(self) -> (usize, Option<usize>) {
        use EvalBuiltin::*;
        match self {
            NetworkCost | PendingCount | CountUnsatisfied | CountTrue | AnyTrue => (1, Some(1)),
            Add | Mul | Max | Min => (1, None),
            Sub => (1, Some(2)),
            Div => (2, Some(2)),
            If => (3, Some(3)),
        }
    }
}

/// Right-hand side of an `init` definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitExpr {
    Number(Ratio<i64>),
    TdgTable {
        primitive_cost: u64,
        abstract_init: u64,
    },
    GoalFacts(String),
    Facts(String),
    TaskPattern(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Def {
    pub symbol: String,
    pub value: InitExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Number(Ratio<i64>),
    /// Index into [`HelProgram::defs`].
    Symbol(usize),
    Call(EvalBuiltin, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelProgram {
    pub name: String,
    pub defs: Vec<Def>,
    pub eval: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HelErrorKind {
    /// Malformed text or program shape.
    Syntax,
    /// Well-formed but violates a static rule (unknown or misplaced
    /// builtin, unbound symbol, wrong arity).
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct HelError {
    pub kind: HelErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for HelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(n) => write_number(f, n),
            Expr::Symbol(i) => write!(f, "${i}"),
            Expr::Call(b, args) => {
                write!(f, "({}", b.name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, n: &Ratio<i64>) -> fmt::Result {
    if n.is_integer() {
        write!(f, "{}", n.numer())
    } else {
        write!(f, "{}/{}", n.numer(), n.denom())
    }
}
