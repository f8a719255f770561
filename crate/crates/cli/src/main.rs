//! The `htnplan` command: parse, ground and solve HDDL problems, generate
//! and select HEL heuristics, and run and report benchmarks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;

use htnplan::bench::{self, Limits, ProblemRef, RunLog, System};
use htnplan::ground::{self, GroundOptions};
use htnplan::hddl;
use htnplan::heuristic::HeuristicSpec;
use htnplan::pipeline::{self, CandidateStore, EvalConfig};
use htnplan::search::{self, plan_text, Algorithm, SearchConfig, SearchStatus};
use htnplan::suite::SuiteManifest;

/// Total-order HTN planning with pluggable heuristics.
#[derive(Parser)]
#[command(name = "htnplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse HDDL files and print summary counts.
    Parse(ParseArgs),
    /// Ground a problem and print its size, or dump the grounded model.
    Ground(GroundArgs),
    /// Search for a plan.
    Solve(SolveArgs),
    /// Request candidate heuristics from a provider.
    Generate(GenerateArgs),
    /// Evaluate stored candidates on the training problem and pick one.
    Select(SelectArgs),
    /// Run a (system x algorithm x problem) matrix.
    Bench(BenchArgs),
    /// Write CSV reports from a runs file.
    Report(ReportArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// A domain file, optionally followed by problem files for it.
    domain: PathBuf,
    problems: Vec<PathBuf>,
}

#[derive(Args)]
struct GroundFlags {
    /// Keep operators and methods that relaxed reachability would prune.
    #[arg(long)]
    no_relaxed_pruning: bool,
    /// Keep static facts in the model.
    #[arg(long)]
    no_static_strip: bool,
    /// Maximum number of grounded atoms, actions and methods.
    #[arg(long, default_value_t = GroundOptions::default().instantiation_cap)]
    instantiation_cap: usize,
}

impl GroundFlags {
    fn options(&self) -> GroundOptions {
        GroundOptions {
            relaxed_pruning: !self.no_relaxed_pruning,
            strip_static: !self.no_static_strip,
            instantiation_cap: self.instantiation_cap,
        }
    }
}

#[derive(Args)]
struct GroundArgs {
    domain: PathBuf,
    problem: PathBuf,
    /// Write the grounded model in the line-oriented dump format (`-` for stdout).
    #[arg(long)]
    dump: Option<PathBuf>,
    #[command(flatten)]
    flags: GroundFlags,
}

#[derive(Args)]
struct SolveArgs {
    domain: PathBuf,
    problem: PathBuf,
    /// `blind`, `tdg`, or a path to a `.hel` program.
    #[arg(long, default_value = "tdg")]
    heuristic: String,
    #[arg(long, default_value = "gbfs")]
    algo: Algorithm,
    /// Weight of h for wastar, as an integer, decimal or fraction.
    #[arg(long, default_value = "5")]
    weight: String,
    /// Seconds.
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    #[arg(long)]
    node_budget: Option<u64>,
    /// Advisory limit in bytes on the memory held by the search.
    #[arg(long)]
    memory_limit: Option<u64>,
    /// Cost of each action in the built-in TDG heuristic.
    #[arg(long)]
    tdg_primitive_cost: Option<u64>,
    /// Where to write the plan; stdout if omitted or `-`.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[command(flatten)]
    flags: GroundFlags,
}

#[derive(Args)]
struct GenerateArgs {
    /// Suite directory or manifest file.
    #[arg(long)]
    suite: PathBuf,
    /// `mock:<dir>` or a provider config file.
    #[arg(long)]
    provider: String,
    #[arg(long, default_value_t = pipeline::DEFAULT_CANDIDATES)]
    n: usize,
    /// Candidate store directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    suite: PathBuf,
    /// Candidate store written by `generate`.
    #[arg(long)]
    store: PathBuf,
    /// Seconds per candidate.
    #[arg(long, default_value_t = pipeline::SELECTION_TIMEOUT.as_secs_f64())]
    timeout: f64,
    #[arg(long)]
    node_budget: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// A suite, or a directory of suites.
    #[arg(long)]
    suite: PathBuf,
    /// Comma-separated: blind, tdg, .hel paths, optionally `label=...`.
    #[arg(long, value_delimiter = ',', default_value = "blind,tdg")]
    systems: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "astar,gbfs,wastar")]
    algos: Vec<Algorithm>,
    /// Seconds per cell.
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    #[arg(long)]
    node_budget: Option<u64>,
    /// Advisory bytes per cell.
    #[arg(long, default_value_t = 8 << 30)]
    memory_limit: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory for runs.jsonl.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// A runs.jsonl file, or a directory containing one.
    #[arg(long)]
    runs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("invalid number of seconds: {s}"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_domain(path: &Path) -> Result<hddl::LiftedDomain> {
    hddl::parse_domain(&read(path)?).map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

fn parse_problem(path: &Path, d: &hddl::LiftedDomain) -> Result<hddl::LiftedProblem> {
    hddl::parse_problem(&read(path)?, d).map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

fn load_model(domain: &Path, problem: &Path, flags: &GroundFlags) -> Result<ground::GroundedModel> {
    let d = parse_domain(domain)?;
    let p = parse_problem(problem, &d)?;
    ground::ground(&d, &p, &flags.options())
        .with_context(|| format!("grounding {}", problem.display()))
}

fn cmd_parse(a: ParseArgs) -> Result<ExitCode> {
    let d = parse_domain(&a.domain)?;
    println!(
        "domain {}: types={} predicates={} tasks={} methods={} actions={}",
        d.name,
        d.types.len(),
        d.predicates.len(),
        d.tasks.len(),
        d.methods.len(),
        d.actions.len()
    );
    for p in &a.problems {
        let pr = parse_problem(p, &d)?;
        println!(
            "problem {}: objects={} init={} goal={} tasks={}",
            pr.name,
            pr.objects.len(),
            pr.init.len(),
            pr.goal.len(),
            pr.initial_network.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ground(a: GroundArgs) -> Result<ExitCode> {
    let m = load_model(&a.domain, &a.problem, &a.flags)?;
    match a.dump.as_deref() {
        Some(p) if p == Path::new("-") => print!("{}", ground::dump(&m)),
        Some(p) => fs::write(p, ground::dump(&m))
            .with_context(|| format!("cannot write {}", p.display()))?,
        None => println!(
            "facts={} operators={} tasks={} methods={}",
            m.facts.len(),
            m.operators.len(),
            m.compound_tasks.len(),
            m.methods.len()
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: SolveArgs) -> Result<ExitCode> {
    let model = match load_model(&a.domain, &a.problem, &a.flags) {
        Ok(m) => m,
        Err(e) => match e.downcast_ref::<ground::GroundError>() {
            Some(ground::GroundError::TriviallyUnsolvable(why)) => {
                eprintln!("{why}");
                println!("status=exhausted expanded=0 length=0 time=0.000");
                return Ok(ExitCode::from(2));
            }
            _ => return Err(e),
        },
    };
    let mut spec = HeuristicSpec::load(&a.heuristic)?;
    if let (HeuristicSpec::Tdg { primitive_cost }, Some(c)) = (&mut spec, a.tdg_primitive_cost) {
        *primitive_cost = Some(c);
    }
    let weight = htnplan::hel::parse_number_literal(&a.weight)
        .map_err(|e| anyhow::anyhow!("invalid weight: {e}"))?;
    if weight < Ratio::from_integer(1) {
        bail!("weight must be at least 1");
    }
    let config = SearchConfig {
        algorithm: a.algo,
        weight,
        time_limit: Some(seconds(a.time_limit)?),
        node_budget: a.node_budget,
        memory_budget: a.memory_limit,
        ..SearchConfig::default()
    };
    let r = search::solve(&model, &spec, &config)?;
    println!(
        "status={} expanded={} length={} time={:.3}",
        r.status, r.expanded, r.plan_length, r.wall_time
    );
    if let Some(d) = &r.diagnostic {
        eprintln!("{d}");
    }
    if r.status == SearchStatus::Solved {
        let text = plan_text(&r.plan);
        match a.plan.as_deref() {
            None => print!("{text}"),
            Some(p) if p == Path::new("-") => print!("{text}"),
            Some(p) => {
                fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?
            }
        }
    }
    Ok(ExitCode::from(match r.status {
        SearchStatus::Solved => 0,
        SearchStatus::Exhausted => 2,
        SearchStatus::Timeout => 3,
        SearchStatus::NodeBudgetExhausted | SearchStatus::MemoryExceeded => 4,
        SearchStatus::HeuristicFailed => 1,
    }))
}

fn cmd_generate(a: GenerateArgs) -> Result<ExitCode> {
    let suite = SuiteManifest::load(&a.suite)?;
    let provider = pipeline::provider_from_arg(&a.provider).map_err(anyhow::Error::msg)?;
    let store = CandidateStore::create(&a.out)?;
    let records = pipeline::generate(&suite, provider.as_ref(), a.n, &store)?;
    let mut counts = std::collections::BTreeMap::new();
    for r in &records {
        *counts.entry(r.status.as_str()).or_insert(0) += 1;
    }
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("candidates={} {}", records.len(), summary.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn cmd_select(a: SelectArgs) -> Result<ExitCode> {
    let suite = SuiteManifest::load(&a.suite)?;
    let store = CandidateStore::open(&a.store)?;
    let config = EvalConfig {
        timeout: seconds(a.timeout)?,
        node_budget: a.node_budget,
        ..EvalConfig::default()
    };
    let s = pipeline::select_stage(&suite, &store, &config, a.jobs)?;
    let summary: Vec<String> = s
        .status_counts
        .iter()
        .map(|(k, v)| format!("{}={v}", k.as_str()))
        .collect();
    match s.selected_record() {
        Some(r) => println!(
            "selected=cand_{:02} expanded={} length={} {}",
            r.id.ordinal,
            r.training_expanded.unwrap_or(0),
            r.training_plan_length.unwrap_or(0),
            summary.join(" ")
        ),
        None => println!("selected=none {}", summary.join(" ")),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let suites = SuiteManifest::discover(&a.suite)?;
    let systems = a
        .systems
        .iter()
        .map(|s| System::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let problems = ProblemRef::from_suites(&suites);
    let limits = Limits {
        time_limit: Some(seconds(a.time_limit)?),
        node_budget: a.node_budget,
        memory_budget: Some(a.memory_limit),
    };
    fs::create_dir_all(&a.out)?;
    let log = RunLog::open(&a.out.join(bench::RUNS_FILE))?;
    let failed = std::sync::atomic::AtomicBool::new(false);
    let records = bench::run_matrix(&systems, &a.algos, &problems, &limits, a.jobs, &|r| {
        if log.append(r).is_err() {
            failed.store(true, std::sync::atomic::Ordering::Relaxed);
        }
    });
    if failed.into_inner() {
        bail!(
            "could not append to {}",
            a.out.join(bench::RUNS_FILE).display()
        );
    }
    let solved = records.iter().filter(|r| r.solved()).count();
    println!("cells={} solved={solved}", records.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(a: ReportArgs) -> Result<ExitCode> {
    let path = if a.runs.is_dir() {
        a.runs.join(bench::RUNS_FILE)
    } else {
        a.runs.clone()
    };
    let records =
        bench::read_runs(&path).with_context(|| format!("cannot read {}", path.display()))?;
    for p in bench::emit_reports(&records, &a.out)? {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Ground(a) => cmd_ground(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Select(a) => cmd_select(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
