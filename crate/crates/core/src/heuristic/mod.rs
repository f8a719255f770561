//! Heuristic plugins.
//!
//! A heuristic is prepared once per model by [`HeuristicSpec::initialize`]
//! and then asked for an estimate at every generated node through the
//! returned [`HeuristicHandle`]. Estimates are exact non-negative
//! rationals. A failing evaluation poisons the handle, and search stops
//! with [`SearchStatus::HeuristicFailed`](crate::search::SearchStatus).

mod tdg;

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use thiserror::Error;

use crate::ground::GroundedModel;
use crate::hel::{self, HelError, HelProgram};
use crate::search::SearchNode;

pub use tdg::{method_visits, tdg_fixpoint, TdgCost, TdgTable};

/// Heuristic values are exact rationals.
pub type HValue = Ratio<i64>;

/// Default starting cost of compound tasks in the built-in TDG heuristic;
/// large enough that no real decomposition is capped by it.
pub const TDG_ABSTRACT_INIT: u64 = u64::MAX / 4;

/// Cost charged for a task without any finite decomposition.
pub fn infinity_penalty(model: &GroundedModel) -> u64 {
    10 * (model.num_facts() + model.num_tasks()) as u64
}

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error(transparent)]
    Hel(#[from] HelError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown heuristic {0:?} (expected blind, tdg or a .hel file)")]
    Unknown(String),
}

/// A per-node estimator owned by one search.
pub trait Heuristic {
    /// Non-negative estimate for `node`, or a description of the fault.
    fn evaluate(&mut self, node: &SearchNode) -> Result<HValue, String>;

    /// True once an estimate had to be clamped.
    fn warned(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeuristicStats {
    pub evaluations: u64,
    pub eval_time: Duration,
}

pub struct HeuristicHandle {
    name: String,
    inner: Box<dyn Heuristic>,
    stats: HeuristicStats,
    root_value: Option<HValue>,
    poison: Option<String>,
}

impl HeuristicHandle {
    /// Wraps an already initialized heuristic and evaluates `root`.
    pub fn new(name: impl Into<String>, inner: Box<dyn Heuristic>, root: &SearchNode) -> Self {
        let mut h = HeuristicHandle {
            name: name.into(),
            inner,
            stats: HeuristicStats::default(),
            root_value: None,
            poison: None,
        };
        h.root_value = h.evaluate(root);
        h
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `None` once the handle is poisoned.
    pub fn evaluate(&mut self, node: &SearchNode) -> Option<HValue> {
        if self.poison.is_some() {
            return None;
        }
        let t = Instant::now();
        let r = self.inner.evaluate(node);
        self.stats.evaluations += 1;
        self.stats.eval_time += t.elapsed();
        match r {
            Ok(v) => {
                debug_assert!(v >= HValue::from_integer(0), "negative estimate {v}");
                Some(v)
            }
            Err(e) => {
                self.poison = Some(e);
                None
            }
        }
    }

    pub fn stats(&self) -> HeuristicStats {
        self.stats
    }

    pub fn root_value(&self) -> Option<HValue> {
        self.root_value
    }

    pub fn poisoned(&self) -> Option<&str> {
        self.poison.as_deref()
    }

    pub fn warned(&self) -> bool {
        self.inner.warned()
    }
}

/// The constant-zero estimate.
pub struct Blind;

impl Heuristic for Blind {
    fn evaluate(&mut self, _: &SearchNode) -> Result<HValue, String> {
        Ok(HValue::from_integer(0))
    }
}

/// Sum of precomputed minimum decomposition costs over the pending tasks.
pub struct Tdg {
    /// Indexed by [`GroundedModel::task_index`]; `∞` already clamped.
    costs: Vec<u64>,
    nops: usize,
}

impl Tdg {
    pub fn new(model: &GroundedModel, primitive_cost: Option<u64>) -> Self {
        let table = tdg_fixpoint(model, primitive_cost, TDG_ABSTRACT_INIT);
        Tdg {
            costs: table.clamped(infinity_penalty(model)),
            nops: model.operators.len(),
        }
    }
}

impl Heuristic for Tdg {
    fn evaluate(&mut self, node: &SearchNode) -> Result<HValue, String> {
        let mut sum: u64 = 0;
        for t in &node.network {
            let i = match t {
                crate::ground::TaskRef::Primitive(o) => o as usize,
                crate::ground::TaskRef::Compound(c) => self.nops + c as usize,
            };
            sum = sum
                .checked_add(self.costs[i])
                .ok_or("tdg estimate overflow")?;
        }
        let sum = i64::try_from(sum).map_err(|_| "tdg estimate overflow")?;
        Ok(HValue::from_integer(sum))
    }
}

/// Which heuristic to build for a search.
#[derive(Debug, Clone)]
pub enum HeuristicSpec {
    Blind,
    Tdg {
        /// Cost of every non-synthetic operator; the operator's own cost if `None`.
        primitive_cost: Option<u64>,
    },
    Hel(Arc<HelProgram>),
}

impl HeuristicSpec {
    /// `blind`, `tdg`, or a path to a `.hel` program.
    pub fn load(name_or_path: &str) -> Result<Self, HeuristicError> {
        match name_or_path {
            "blind" => Ok(HeuristicSpec::Blind),
            "tdg" => Ok(HeuristicSpec::Tdg {
                primitive_cost: None,
            }),
            p if p.ends_with(".hel") || Path::new(p).is_file() => {
                let text = std::fs::read_to_string(p).map_err(|source| HeuristicError::Io {
                    path: p.to_owned(),
                    source,
                })?;
                Ok(HeuristicSpec::Hel(Arc::new(hel::parse(&text)?)))
            }
            other => Err(HeuristicError::Unknown(other.to_owned())),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            HeuristicSpec::Blind => "blind",
            HeuristicSpec::Tdg { .. } => "tdg",
            HeuristicSpec::Hel(p) => &p.name,
        }
    }

    pub fn initialize(
        &self,
        model: &GroundedModel,
        root: &SearchNode,
    ) -> Result<HeuristicHandle, HeuristicError> {
        let inner: Box<dyn Heuristic> = match self {
            HeuristicSpec::Blind => Box::new(Blind),
            HeuristicSpec::Tdg { primitive_cost } => Box::new(Tdg::new(model, *primitive_cost)),
            HeuristicSpec::Hel(p) => Box::new(hel::HelHeuristic::new(p.clone(), model)),
        };
        Ok(HeuristicHandle::new(self.name(), inner, root))
    }
}
