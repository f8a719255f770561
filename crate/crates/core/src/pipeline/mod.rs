//! Candidate heuristics from a language model: prompt assembly, provider
//! requests, evaluation on a training problem, and selection.
//!
//! [`generate`] sends `n` independent copies of one prompt and stores every
//! reply as a [`CandidateRecord`]. [`select_stage`] runs each parsed
//! candidate with greedy best-first search on the suite's training problem
//! and keeps the one with the fewest expansions, preferring shorter plans
//! and then lower ordinals on ties.

mod prompt;
mod provider;
mod store;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ground::{GroundOptions, GroundedModel};
use crate::hel::{self, HelErrorKind, HelHeuristic, HelProgram};
use crate::heuristic::HeuristicHandle;
use crate::search::{search, Algorithm, SearchConfig, SearchNode, SearchStatus};
use crate::suite::{SourceReader, SuiteError, SuiteManifest};

pub use prompt::{
    build_prompt, build_refinement_prompt, HintBlock, PromptSpec, ADVICE_BETTER, ADVICE_ERROR,
    ADVICE_SECOND_BOUND, ADVICE_STATE, ADVICE_TIMEOUT, HINTS_INTRO, INTERFACE_DOCS, KEEP_PREVIOUS,
    WORKED_EXAMPLE,
};
pub use provider::{
    provider_from_arg, request_candidates, HttpProvider, MockProvider, MockReply, Provider,
    ProviderConfig, RawResponse, MAX_RETRIES,
};
pub use store::{CandidateStore, Timing};

/// Candidates requested per domain and model.
pub const DEFAULT_CANDIDATES: usize = 20;

/// Wall-clock limit for one candidate on the training problem.
pub const SELECTION_TIMEOUT: Duration = Duration::from_secs(60);

/// Algorithm used to compare candidates.
pub const SELECTION_ALGORITHM: Algorithm = Algorithm::Gbfs;

pub const SELECTION_CRITERION: &str =
    "gbfs; min expanded, tie -> shorter plan, tie -> lowest ordinal";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Provider(String),
    #[error("{0}")]
    Invalid(String),
    #[error("selection opened files other than the training problem: {0:?}")]
    Leak(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateId {
    pub model: String,
    pub domain: String,
    pub ordinal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStatus {
    /// Well-formed, not yet evaluated.
    Parsed,
    /// No program could be extracted or it is malformed; also failed requests.
    ParseFailed,
    /// Well-formed but rejected by the static checks.
    StaticFailed,
    /// Failed during search: type fault, overflow, memory, or no plan.
    RuntimeFailed,
    TimedOut,
    Ok,
}

impl CandidateStatus {
    pub const ALL: [CandidateStatus; 6] = [
        CandidateStatus::Parsed,
        CandidateStatus::ParseFailed,
        CandidateStatus::StaticFailed,
        CandidateStatus::RuntimeFailed,
        CandidateStatus::TimedOut,
        CandidateStatus::Ok,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CandidateStatus::Parsed => "parsed",
            CandidateStatus::ParseFailed => "parse-failed",
            CandidateStatus::StaticFailed => "static-failed",
            CandidateStatus::RuntimeFailed => "runtime-failed",
            CandidateStatus::TimedOut => "timed-out",
            CandidateStatus::Ok => "ok",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: CandidateId,
    pub raw_response: String,
    /// Contents of the extracted code block.
    pub program_text: Option<String>,
    /// Name given on the `NAME:` line.
    pub declared_name: Option<String>,
    #[serde(skip)]
    pub program: Option<Arc<HelProgram>>,
    pub status: CandidateStatus,
    /// Why the candidate failed, or a warning for an ok one.
    pub diagnostic: Option<String>,
    pub training_expanded: Option<u64>,
    pub training_plan_length: Option<usize>,
    /// Seconds. Kept out of stored records so they stay reproducible;
    /// the store logs it separately.
    #[serde(skip)]
    pub training_time: f64,
}

/// Splits a reply into its `NAME:` line and the body of its code block.
///
/// A block tagged `hel` wins over untagged blocks; without one, a single
/// untagged block is accepted.
pub fn extract_program(response: &str) -> Result<(Option<String>, String), String> {
    let name = response
        .lines()
        .find_map(|l| l.trim().strip_prefix("NAME:").map(|n| n.trim().to_owned()))
        .filter(|n| !n.is_empty());
    let mut blocks: Vec<(String, String)> = Vec::new();
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in response.lines() {
        let t = line.trim_start();
        match (&mut open, t.strip_prefix("```")) {
            (None, Some(tag)) => open = Some((tag.trim().to_lowercase(), Vec::new())),
            (Some(_), Some(rest)) if rest.trim().is_empty() => {
                let (tag, body) = open.take().unwrap();
                blocks.push((tag, body.join("\n")));
            }
            (Some((_, body)), _) => body.push(line),
            (None, None) => {}
        }
    }
    if let Some((_, b)) = blocks.iter().find(|(t, _)| t == "hel") {
        return Ok((name, b.clone()));
    }
    let untagged: Vec<&String> = blocks
        .iter()
        .filter(|(t, _)| t.is_empty())
        .map(|(_, b)| b)
        .collect();
    match untagged.as_slice() {
        [b] => Ok((name, (*b).clone())),
        [] => Err("no fenced hel code block in the response".into()),
        _ => Err("several untagged code blocks and none tagged hel".into()),
    }
}

impl CandidateRecord {
    /// Classifies one provider reply.
    pub fn from_response(id: CandidateId, reply: Result<String, String>) -> Self {
        let mut r = CandidateRecord {
            id,
            raw_response: String::new(),
            program_text: None,
            declared_name: None,
            program: None,
            status: CandidateStatus::ParseFailed,
            diagnostic: None,
            training_expanded: None,
            training_plan_length: None,
            training_time: 0.0,
        };
        let text = match reply {
            Ok(t) => t,
            Err(e) => {
                r.diagnostic = Some(e);
                return r;
            }
        };
        r.raw_response = text;
        match extract_program(&r.raw_response) {
            Ok((name, body)) => {
                r.declared_name = name;
                r.program_text = Some(body);
                r.reparse();
            }
            Err(e) => r.diagnostic = Some(e),
        }
        r
    }

    /// Re-derives `program` (and the parse status) from `program_text`.
    /// Evaluated statuses are kept.
    pub fn reparse(&mut self) {
        let Some(text) = &self.program_text else {
            return;
        };
        match hel::parse(text) {
            Ok(p) => {
                self.program = Some(Arc::new(p));
                if matches!(
                    self.status,
                    CandidateStatus::ParseFailed | CandidateStatus::StaticFailed
                ) {
                    self.status = CandidateStatus::Parsed;
                    self.diagnostic = None;
                }
            }
            Err(e) => {
                self.program = None;
                self.status = match e.kind {
                    HelErrorKind::Syntax => CandidateStatus::ParseFailed,
                    HelErrorKind::Static => CandidateStatus::StaticFailed,
                };
                self.diagnostic = Some(e.to_string());
            }
        }
    }
}

/// Limits for one candidate run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub timeout: Duration,
    pub node_budget: Option<u64>,
    pub memory_budget: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            timeout: SELECTION_TIMEOUT,
            node_budget: None,
            memory_budget: Some(8 << 30),
        }
    }
}

/// Runs a parsed candidate on the training model. Records in any other
/// status are returned unchanged.
pub fn evaluate_candidate(
    mut record: CandidateRecord,
    model: &GroundedModel,
    config: &EvalConfig,
) -> CandidateRecord {
    if record.status != CandidateStatus::Parsed {
        return record;
    }
    if record.program.is_none() {
        record.reparse();
    }
    let Some(program) = record.program.clone() else {
        return record;
    };
    let search_config = SearchConfig {
        algorithm: SELECTION_ALGORITHM,
        time_limit: Some(config.timeout),
        node_budget: config.node_budget,
        memory_budget: config.memory_budget,
        ..SearchConfig::default()
    };
    let start = std::time::Instant::now();
    let root = SearchNode::root(model);
    let mut handle = HeuristicHandle::new(
        program.name.clone(),
        Box::new(HelHeuristic::new(program, model)),
        &root,
    );
    let r = search(model, &mut handle, &search_config);
    record.training_time = start.elapsed().as_secs_f64();
    let (status, diagnostic) = match r.status {
        SearchStatus::Solved => {
            record.training_expanded = Some(r.expanded);
            record.training_plan_length = Some(r.plan_length);
            let warn = handle
                .warned()
                .then(|| "negative estimates were clamped to 0".to_owned());
            (CandidateStatus::Ok, warn)
        }
        SearchStatus::Timeout => (
            CandidateStatus::TimedOut,
            Some(format!("timeout after {:?}", config.timeout)),
        ),
        SearchStatus::NodeBudgetExhausted => (
            CandidateStatus::TimedOut,
            Some(format!("node budget of {} exhausted", r.expanded)),
        ),
        SearchStatus::HeuristicFailed => (
            CandidateStatus::RuntimeFailed,
            Some(format!(
                "heuristic-failed: {}",
                r.diagnostic.unwrap_or_default()
            )),
        ),
        SearchStatus::MemoryExceeded => (
            CandidateStatus::RuntimeFailed,
            Some("memory-exceeded".into()),
        ),
        SearchStatus::Exhausted => (
            CandidateStatus::RuntimeFailed,
            Some("exhausted: search space exhausted without a plan".into()),
        ),
    };
    record.status = status;
    record.diagnostic = diagnostic;
    record
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub domain: String,
    pub model_name: String,
    pub selected: Option<CandidateId>,
    pub criterion: String,
    /// Candidates per status; sums to the number of candidates.
    pub status_counts: BTreeMap<CandidateStatus, usize>,
    /// In ordinal order.
    pub candidates: Vec<CandidateRecord>,
}

impl SelectionRecord {
    pub fn selected_record(&self) -> Option<&CandidateRecord> {
        let id = self.selected.as_ref()?;
        self.candidates.iter().find(|c| &c.id == id)
    }
}

/// Picks the ok candidate with the fewest training expansions, then the
/// shortest plan, then the lowest ordinal.
pub fn select(mut records: Vec<CandidateRecord>) -> SelectionRecord {
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let selected = records
        .iter()
        .filter(|r| r.status == CandidateStatus::Ok)
        .min_by_key(|r| (r.training_expanded, r.training_plan_length, r.id.ordinal))
        .map(|r| r.id.clone());
    let mut status_counts: BTreeMap<CandidateStatus, usize> = BTreeMap::new();
    for r in &records {
        *status_counts.entry(r.status).or_default() += 1;
    }
    let first = records.first();
    SelectionRecord {
        domain: first.map(|r| r.id.domain.clone()).unwrap_or_default(),
        model_name: first.map(|r| r.id.model.clone()).unwrap_or_default(),
        selected,
        criterion: SELECTION_CRITERION.into(),
        status_counts,
        candidates: records,
    }
}

/// Builds the prompt for `suite` from its domain, training (smallest)
/// and largest problems, and hint file.
pub fn prompt_spec(
    suite: &SuiteManifest,
    reader: &SourceReader,
) -> Result<PromptSpec, PipelineError> {
    let domain_text = reader.read(&suite.domain)?;
    let domain_name = crate::hddl::parse_domain(&domain_text)
        .map(|d| d.name)
        .map_err(|err| SuiteError::Parse {
            path: suite.domain.clone(),
            err,
        })?;
    let hint_block = match &suite.hints {
        Some(p) => Some(
            serde_json::from_str::<HintBlock>(&reader.read(p)?)
                .map_err(|e| PipelineError::Invalid(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let small = reader.read(&suite.training)?;
    let large = reader.read(&suite.largest()?)?;
    if domain_text.trim().is_empty() || small.trim().is_empty() || large.trim().is_empty() {
        return Err(PipelineError::Invalid(
            "empty domain or problem file".into(),
        ));
    }
    Ok(PromptSpec::new(
        domain_name,
        domain_text,
        small,
        large,
        hint_block,
    ))
}

/// Requests `n` candidates for `suite` and writes them to `store`.
pub fn generate(
    suite: &SuiteManifest,
    provider: &dyn Provider,
    n: usize,
    store: &CandidateStore,
) -> Result<Vec<CandidateRecord>, PipelineError> {
    let reader = SourceReader::new();
    let spec = prompt_spec(suite, &reader)?;
    let prompt = build_prompt(&spec);
    store.write_prompt(&prompt)?;
    let replies = request_candidates(&prompt, provider, n);
    let mut records = Vec::with_capacity(n);
    for reply in replies {
        let id = CandidateId {
            model: provider.model_name().to_owned(),
            domain: suite.name.clone(),
            ordinal: reply.ordinal,
        };
        store.log_timing(&Timing::request(&id, reply.requested_at, reply.received_at))?;
        let rec = CandidateRecord::from_response(id, reply.result);
        store.write_candidate(&rec)?;
        records.push(rec);
    }
    Ok(records)
}

/// Evaluates the stored candidates on the training problem and writes
/// `selection.json`. Only the domain file and the training problem are
/// read; anything else is reported as [`PipelineError::Leak`].
pub fn select_stage(
    suite: &SuiteManifest,
    store: &CandidateStore,
    config: &EvalConfig,
    jobs: usize,
) -> Result<SelectionRecord, PipelineError> {
    let reader = SourceReader::new();
    let model = reader.ground(&suite.domain, &suite.training, &GroundOptions::default())?;
    let leaked: Vec<PathBuf> = reader
        .opened()
        .into_iter()
        .filter(|p| p != &suite.domain && p != &suite.training)
        .collect();
    if !leaked.is_empty() {
        return Err(PipelineError::Leak(leaked));
    }
    let records = store.load_candidates()?;
    if records.is_empty() {
        return Err(PipelineError::Invalid(format!(
            "no candidates in {}",
            store.dir().display()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let evaluated: Vec<CandidateRecord> = pool.install(|| {
        records
            .into_par_iter()
            .map(|r| evaluate_candidate(r, &model, config))
            .collect()
    });
    for r in &evaluated {
        store.write_candidate(r)?;
        store.log_timing(&Timing::evaluation(r))?;
    }
    let selection = select(evaluated);
    store.write_selection(&selection)?;
    Ok(selection)
}
