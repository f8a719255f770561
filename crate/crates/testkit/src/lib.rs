//! Reference oracles and instance generators shared by the htnplan test
//! suites. Nothing here is used by the planner itself.

pub mod brute;
pub mod hierarchy;
pub mod lifted;
pub mod micro;
pub mod records;
pub mod ucs;

use std::path::{Path, PathBuf};

use htnplan::ground::{ground, GroundOptions, GroundedModel};
use htnplan::hddl::{parse_domain, parse_problem};
use htnplan::suite::SuiteManifest;

/// Root of the source tree.
pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("repository root")
}

pub fn benchmarks() -> PathBuf {
    repo_root().join("benchmarks")
}

/// The bundled suites, in name order.
pub fn mini_suite() -> Vec<SuiteManifest> {
    SuiteManifest::discover(&benchmarks()).expect("bundled suites")
}

/// Parses and grounds a domain/problem pair with default options.
pub fn load(domain: &Path, problem: &Path) -> GroundedModel {
    load_with(domain, problem, &GroundOptions::default())
}

pub fn load_with(domain: &Path, problem: &Path, opts: &GroundOptions) -> GroundedModel {
    let d = parse_domain(&std::fs::read_to_string(domain).unwrap()).unwrap();
    let p = parse_problem(&std::fs::read_to_string(problem).unwrap(), &d).unwrap();
    ground(&d, &p, opts).unwrap()
}

/// Grounds HDDL given as text.
pub fn ground_text(
    domain: &str,
    problem: &str,
    opts: &GroundOptions,
) -> Result<GroundedModel, htnplan::ground::GroundError> {
    let d = parse_domain(domain).unwrap_or_else(|e| panic!("{e}\n{domain}"));
    let p = parse_problem(problem, &d).unwrap_or_else(|e| panic!("{e}\n{problem}"));
    ground(&d, &p, opts)
}

/// Every bundled HDDL file, split into domains and problems.
pub fn hddl_corpus() -> (Vec<PathBuf>, Vec<PathBuf>) {
    let mut files: Vec<PathBuf> = std::fs::read_dir(benchmarks())
        .unwrap()
        .flat_map(|d| std::fs::read_dir(d.unwrap().path()).unwrap())
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "hddl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .partition(|p| !std::fs::read_to_string(p).unwrap().contains("(:domain"))
}
