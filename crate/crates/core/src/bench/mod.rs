//! Benchmark matrix runs and their aggregates.
//!
//! [`run_matrix`] runs every (system, algorithm, problem) cell in a fresh
//! search with a fresh heuristic handle and returns one [`RunRecord`] per
//! cell. The functions in [`aggregate`] turn records into coverage,
//! virtual-best, head-to-head, median and cactus data, and
//! [`emit_reports`] writes them as CSV.

pub mod aggregate;
mod report;

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ground::{GroundError, GroundOptions};
use crate::heuristic::HeuristicSpec;
use crate::search::{solve, validate, Algorithm, SearchConfig, SearchStatus};
use crate::suite::{problem_label, SourceReader, SuiteError, SuiteManifest};

pub use aggregate::{
    cactus, coverage, head_to_head, lower_median, medians, plan_length_intersection, scatter,
    virtual_best, Coverage, HeadToHead, MedianRow, VirtualBest, VirtualBestEntry,
};
pub use report::emit_reports;

pub const RUNS_FILE: &str = "runs.jsonl";

/// Outcome of one matrix cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Solved,
    Exhausted,
    Timeout,
    NodeBudgetExhausted,
    MemoryExceeded,
    HeuristicFailed,
    /// The problem could not be parsed or grounded.
    GroundFailed,
}

impl From<SearchStatus> for RunStatus {
    fn from(s: SearchStatus) -> Self {
        match s {
            SearchStatus::Solved => RunStatus::Solved,
            SearchStatus::Exhausted => RunStatus::Exhausted,
            SearchStatus::Timeout => RunStatus::Timeout,
            SearchStatus::NodeBudgetExhausted => RunStatus::NodeBudgetExhausted,
            SearchStatus::MemoryExceeded => RunStatus::MemoryExceeded,
            SearchStatus::HeuristicFailed => RunStatus::HeuristicFailed,
        }
    }
}

/// How the memory limit of a cell was enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryEnforcement {
    /// No limit configured.
    None,
    /// The search's own estimate of the bytes it holds.
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub domain: String,
    pub problem: String,
    /// Heuristic or baseline label.
    pub system: String,
    pub algorithm: Algorithm,
    pub status: RunStatus,
    pub expanded: u64,
    pub plan_length: usize,
    /// Seconds.
    pub wall_time: f64,
    pub memory_enforcement: MemoryEnforcement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.status == RunStatus::Solved
    }
}

/// Placeholder replaced by the domain label in per-domain system paths.
pub const DOMAIN_PLACEHOLDER: &str = "{domain}";

/// A heuristic under a report label.
#[derive(Debug, Clone)]
pub struct System {
    pub label: String,
    source: SystemSource,
}

#[derive(Debug, Clone)]
enum SystemSource {
    Fixed(HeuristicSpec),
    /// A `.hel` path containing [`DOMAIN_PLACEHOLDER`].
    PerDomain(String),
}

impl System {
    pub fn new(label: impl Into<String>, spec: HeuristicSpec) -> Self {
        System {
            label: label.into(),
            source: SystemSource::Fixed(spec),
        }
    }

    /// `blind`, `tdg`, a `.hel` path, or `label=<any of those>`. A HEL
    /// program is labelled by its declared name unless a label is given.
    /// A path containing `{domain}` is resolved separately for every
    /// domain, which is how per-domain selected heuristics are compared.
    pub fn parse(s: &str) -> Result<Self, crate::heuristic::HeuristicError> {
        let (label, what) = match s.split_once('=') {
            Some((l, w)) if !l.is_empty() => (Some(l), w),
            _ => (None, s),
        };
        if what.contains(DOMAIN_PLACEHOLDER) {
            return Ok(System {
                label: label.unwrap_or(what).to_owned(),
                source: SystemSource::PerDomain(what.to_owned()),
            });
        }
        let spec = HeuristicSpec::load(what)?;
        Ok(System {
            label: label.map_or_else(|| spec.name().to_owned(), str::to_owned),
            source: SystemSource::Fixed(spec),
        })
    }

    /// The heuristic to use on problems of `domain`.
    pub fn spec_for(
        &self,
        domain: &str,
    ) -> Result<HeuristicSpec, crate::heuristic::HeuristicError> {
        match &self.source {
            SystemSource::Fixed(s) => Ok(s.clone()),
            SystemSource::PerDomain(t) => {
                HeuristicSpec::load(&t.replace(DOMAIN_PLACEHOLDER, domain))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub time_limit: Option<Duration>,
    pub node_budget: Option<u64>,
    pub memory_budget: Option<u64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            time_limit: Some(Duration::from_secs(1800)),
            node_budget: None,
            memory_budget: Some(8 << 30),
        }
    }
}

/// One problem of a suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemRef {
    pub domain_label: String,
    pub problem_label: String,
    pub domain_file: PathBuf,
    pub problem_file: PathBuf,
}

impl ProblemRef {
    pub fn from_suites(suites: &[SuiteManifest]) -> Vec<ProblemRef> {
        suites
            .iter()
            .flat_map(|s| {
                s.problems.iter().map(|p| ProblemRef {
                    domain_label: s.name.clone(),
                    problem_label: problem_label(p),
                    domain_file: s.domain.clone(),
                    problem_file: p.clone(),
                })
            })
            .collect()
    }
}

/// Runs every cell on a pool of `jobs` workers (0 = one per core).
///
/// Each completed record is passed to `sink` as soon as it is available;
/// the returned list is in (problem, system, algorithm) order.
pub fn run_matrix(
    systems: &[System],
    algorithms: &[Algorithm],
    problems: &[ProblemRef],
    limits: &Limits,
    jobs: usize,
    sink: &(dyn Fn(&RunRecord) + Sync),
) -> Vec<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        problems
            .par_iter()
            .flat_map_iter(|p| {
                let reader = SourceReader::new();
                let model =
                    reader.ground(&p.domain_file, &p.problem_file, &GroundOptions::default());
                let cells: Vec<(&System, Algorithm)> = systems
                    .iter()
                    .flat_map(|s| algorithms.iter().map(move |&a| (s, a)))
                    .collect();
                let model = &model;
                cells
                    .into_par_iter()
                    .map(move |(sys, alg)| {
                        let r = run_cell(p, model, sys, alg, limits);
                        sink(&r);
                        r
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
            })
            .collect()
    })
}

fn run_cell(
    p: &ProblemRef,
    model: &Result<crate::ground::GroundedModel, SuiteError>,
    sys: &System,
    alg: Algorithm,
    limits: &Limits,
) -> RunRecord {
    let mut rec = RunRecord {
        domain: p.domain_label.clone(),
        problem: p.problem_label.clone(),
        system: sys.label.clone(),
        algorithm: alg,
        status: RunStatus::GroundFailed,
        expanded: 0,
        plan_length: 0,
        wall_time: 0.0,
        memory_enforcement: if limits.memory_budget.is_some() {
            MemoryEnforcement::Advisory
        } else {
            MemoryEnforcement::None
        },
        diagnostic: None,
    };
    let model = match model {
        Ok(m) => m,
        Err(SuiteError::Ground {
            err: GroundError::TriviallyUnsolvable(why),
            ..
        }) => {
            rec.status = RunStatus::Exhausted;
            rec.diagnostic = Some(why.clone());
            return rec;
        }
        Err(SuiteError::Ground {
            err: e @ GroundError::CapExceeded { .. },
            ..
        }) => {
            rec.status = RunStatus::MemoryExceeded;
            rec.diagnostic = Some(e.to_string());
            return rec;
        }
        Err(e) => {
            rec.diagnostic = Some(e.to_string());
            return rec;
        }
    };
    let config = SearchConfig {
        algorithm: alg,
        time_limit: limits.time_limit,
        node_budget: limits.node_budget,
        memory_budget: limits.memory_budget,
        ..SearchConfig::default()
    };
    let result = sys
        .spec_for(&p.domain_label)
        .and_then(|spec| solve(model, &spec, &config));
    match result {
        Ok(r) => {
            rec.status = r.status.into();
            rec.expanded = r.expanded;
            rec.plan_length = r.plan_length;
            rec.wall_time = r.wall_time;
            rec.diagnostic = r.diagnostic.clone();
            debug_assert!(
                r.status != SearchStatus::Solved || validate(model, &r).is_ok(),
                "invalid plan for {}/{} with {} {alg}",
                p.domain_label,
                p.problem_label,
                sys.label
            );
        }
        Err(e) => {
            rec.status = RunStatus::HeuristicFailed;
            rec.diagnostic = Some(e.to_string());
        }
    }
    rec
}

/// An append-only JSON Lines file of [`RunRecord`]s.
pub struct RunLog {
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RunLog {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, r: &RunRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(r).map_err(std::io::Error::other)?;
        line.push('\n');
        let mut f = self.file.lock().unwrap();
        f.write_all(line.as_bytes())?;
        f.flush()
    }
}

pub fn read_runs(path: &Path) -> std::io::Result<Vec<RunRecord>> {
    let f = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {}: {e}", i + 1),
            )
        })?;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips_as_one_json_line() {
        let r = RunRecord {
            domain: "d".into(),
            problem: "p".into(),
            system: "tdg".into(),
            algorithm: Algorithm::Wastar,
            status: RunStatus::NodeBudgetExhausted,
            expanded: 10,
            plan_length: 0,
            wall_time: 0.5,
            memory_enforcement: MemoryEnforcement::Advisory,
            diagnostic: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains('\n'));
        assert!(s.contains(r#""status":"node-budget-exhausted""#), "{s}");
        assert!(s.contains(r#""algorithm":"wastar""#), "{s}");
        assert_eq!(serde_json::from_str::<RunRecord>(&s).unwrap(), r);
    }

    #[test]
    fn system_labels() {
        assert_eq!(System::parse("tdg").unwrap().label, "tdg");
        assert_eq!(System::parse("base=blind").unwrap().label, "base");
        assert!(System::parse("nope").is_err());
        let s = System::parse("llm=/nowhere/{domain}/selected.hel").unwrap();
        assert_eq!(s.label, "llm");
        assert!(s.spec_for("towers").is_err());
    }
}
