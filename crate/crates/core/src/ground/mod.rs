//! Grounded planning model.
//!
//! [`ground`] turns a lifted domain and problem into a [`GroundedModel`]:
//! dense fact ids, STRIPS operators over [`StateBitset`]s, compound tasks
//! and totally ordered methods. Negative preconditions are compiled into
//! complement facts, and method preconditions into zero-cost check
//! operators named `__mprec_<method>` at the head of each method.

mod bitset;
mod dump;
mod grounder;

use std::fmt;

pub use bitset::{fact_holds, StateBitset};
pub use dump::dump;
pub use grounder::{ground, GroundError, GroundOptions};

/// Prefix of the synthetic operators that check method preconditions.
pub const MPREC_PREFIX: &str = "__mprec_";

/// A grounded proposition.
///
/// `name` is the canonical `predicate[arg1,...,argk]` form. A fact with
/// `negated` set is the complement of the atom it names: it holds exactly
/// when the atom does not.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fact {
    pub id: u32,
    pub name: String,
    pub negated: bool,
}

impl Fact {
    /// Runtime rendering: `+name` for atoms, `-name` for complements.
    pub fn display_name(&self) -> String {
        format!("{}{}", if self.negated { '-' } else { '+' }, self.name)
    }

    pub fn predicate(&self) -> &str {
        self.name.split('[').next().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundOperator {
    pub id: u32,
    pub name: String,
    pub cost: u32,
    pub pre: StateBitset,
    pub add: StateBitset,
    pub del: StateBitset,
    /// Method-precondition check; excluded from plans.
    pub synthetic: bool,
}

impl GroundOperator {
    pub fn applicable(&self, state: &StateBitset) -> bool {
        self.pre.is_subset(state)
    }

    pub fn apply(&self, state: &StateBitset) -> StateBitset {
        state.apply(&self.add, &self.del)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundCompoundTask {
    pub id: u32,
    pub name: String,
    pub methods: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundMethod {
    pub id: u32,
    pub name: String,
    pub task: u32,
    pub subtasks: Vec<TaskRef>,
    /// The synthetic check operator heading `subtasks`, if any.
    pub precondition_op: Option<u32>,
}

/// A primitive (operator id) or compound (task id) task occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskRef {
    Primitive(u32),
    Compound(u32),
}

impl fmt::Display for TaskRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskRef::Primitive(i) => write!(f, "o{i}"),
            TaskRef::Compound(i) => write!(f, "t{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedModel {
    pub domain_name: String,
    pub problem_name: String,
    pub facts: Vec<Fact>,
    pub operators: Vec<GroundOperator>,
    pub compound_tasks: Vec<GroundCompoundTask>,
    pub methods: Vec<GroundMethod>,
    pub initial_state: StateBitset,
    pub goals: StateBitset,
    pub initial_network: Vec<TaskRef>,
}

impl GroundedModel {
    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.operators.len() + self.compound_tasks.len()
    }

    pub fn task_name(&self, t: TaskRef) -> &str {
        match t {
            TaskRef::Primitive(i) => &self.operators[i as usize].name,
            TaskRef::Compound(i) => &self.compound_tasks[i as usize].name,
        }
    }

    /// Dense index over all tasks: operators first, then compound tasks.
    pub fn task_index(&self, t: TaskRef) -> usize {
        match t {
            TaskRef::Primitive(i) => i as usize,
            TaskRef::Compound(i) => self.operators.len() + i as usize,
        }
    }

    /// Positive fact with the given canonical name.
    pub fn fact_id(&self, name: &str) -> Option<u32> {
        self.facts
            .iter()
            .find(|f| !f.negated && f.name == name)
            .map(|f| f.id)
    }

    pub fn empty_state(&self) -> StateBitset {
        StateBitset::new(self.facts.len())
    }

    /// `+name` / `-name` for every set bit, in id order.
    pub fn state_explicit_repr(&self, state: &StateBitset) -> Vec<String> {
        state_explicit_repr(self, state)
    }
}

/// Names of exactly the facts set in `state`, in id order.
pub fn state_explicit_repr(model: &GroundedModel, state: &StateBitset) -> Vec<String> {
    state
        .ones()
        .take_while(|&i| i < model.facts.len())
        .map(|i| model.facts[i].display_name())
        .collect()
}

/// Splits `+pred[a,b]` or `-pred[a,b]` into its predicate and arguments.
///
/// Anything else yields `(None, [])`.
pub fn parse_fact_name(name: &str) -> (Option<String>, Vec<String>) {
    let name = name.trim();
    let Some(rest) = name.strip_prefix('+').or_else(|| name.strip_prefix('-')) else {
        return (None, Vec::new());
    };
    match rest.find('[') {
        Some(b) if b > 0 && rest.ends_with(']') => {
            let args = &rest[b + 1..rest.len() - 1];
            let args = if args.is_empty() {
                Vec::new()
            } else {
                args.split(',').map(str::to_owned).collect()
            };
            (Some(rest[..b].to_owned()), args)
        }
        _ => (None, Vec::new()),
    }
}

/// Renders `move[a,b]` as `(move a b)`.
pub fn call_syntax(name: &str) -> String {
    match (name.find('['), name.strip_suffix(']')) {
        (Some(b), Some(inner)) => {
            let args = &inner[b + 1..];
            if args.is_empty() {
                format!("({})", &name[..b])
            } else {
                format!("({} {})", &name[..b], args.replace(',', " "))
            }
        }
        _ => format!("({name})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fact_name_parsing() {
        assert_eq!(
            parse_fact_name("+at[r1,w2]"),
            (Some("at".into()), vec!["r1".into(), "w2".into()])
        );
        assert_eq!(
            parse_fact_name("-empty[s]"),
            (Some("empty".into()), vec!["s".into()])
        );
        assert_eq!(parse_fact_name("garbage"), (None, vec![]));
        assert_eq!(
            parse_fact_name("+handempty[]"),
            (Some("handempty".into()), vec![])
        );
        assert_eq!(parse_fact_name("at[r1]"), (None, vec![]));
        assert_eq!(parse_fact_name("+[x]"), (None, vec![]));
        assert_eq!(parse_fact_name("+at[x"), (None, vec![]));
    }

    #[test]
    fn call_rendering() {
        assert_eq!(call_syntax("move[d1,p1,p2]"), "(move d1 p1 p2)");
        assert_eq!(call_syntax("noop[]"), "(noop)");
    }
}
