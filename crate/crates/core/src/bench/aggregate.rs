//! Aggregates over [`RunRecord`]s.
//!
//! Only solved records ever contribute an expansion count or a plan
//! length; everything else counts as unsolved.

use std::collections::{BTreeMap, BTreeSet};

use super::RunRecord;
use crate::search::Algorithm;

/// `(domain, problem)`
pub type ProblemKey = (String, String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VirtualBestEntry {
    pub solved: bool,
    /// Fewest expansions among the algorithms that solved the problem.
    pub best_expanded: Option<u64>,
    /// Plan length of that run; the shorter plan when two runs tie.
    pub best_plan_length: Option<usize>,
    pub algorithm: Option<Algorithm>,
}

/// Per-problem best outcome of one system over all algorithms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualBest {
    pub system: String,
    pub entries: BTreeMap<ProblemKey, VirtualBestEntry>,
}

impl VirtualBest {
    pub fn solved(&self) -> impl Iterator<Item = (&ProblemKey, u64)> {
        self.entries
            .iter()
            .filter_map(|(k, e)| e.best_expanded.map(|x| (k, x)))
    }

    pub fn domains(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|(d, _)| d.as_str()).collect()
    }
}

pub fn virtual_best(records: &[RunRecord], system: &str) -> VirtualBest {
    let mut entries: BTreeMap<ProblemKey, VirtualBestEntry> = BTreeMap::new();
    for r in records.iter().filter(|r| r.system == system) {
        let e = entries
            .entry((r.domain.clone(), r.problem.clone()))
            .or_insert(VirtualBestEntry {
                solved: false,
                best_expanded: None,
                best_plan_length: None,
                algorithm: None,
            });
        if !r.solved() {
            continue;
        }
        let better = match (e.best_expanded, e.best_plan_length) {
            (Some(x), Some(l)) => (r.expanded, r.plan_length) < (x, l),
            _ => true,
        };
        if better {
            *e = VirtualBestEntry {
                solved: true,
                best_expanded: Some(r.expanded),
                best_plan_length: Some(r.plan_length),
                algorithm: Some(r.algorithm),
            };
        }
    }
    VirtualBest {
        system: system.to_owned(),
        entries,
    }
}

/// Solved problems per domain and overall.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coverage {
    pub per_domain: BTreeMap<String, usize>,
    pub total: usize,
}

pub fn coverage(vb: &VirtualBest) -> Coverage {
    let mut c = Coverage::default();
    for ((d, _), e) in &vb.entries {
        let n = c.per_domain.entry(d.clone()).or_default();
        if e.solved {
            *n += 1;
            c.total += 1;
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeadToHead {
    /// Problems solved by both systems.
    pub shared: usize,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    /// Mean of `(loser - winner) / loser × 100` over the wins.
    pub mean_improvement_pct: Option<f64>,
}

/// Compares `a` against `b` on the problems both solved; a win is
/// strictly fewer expansions for `a`.
pub fn head_to_head(a: &VirtualBest, b: &VirtualBest) -> HeadToHead {
    let mut h = HeadToHead::default();
    let mut improvement = 0.0;
    for (k, xa) in a.solved() {
        let Some(xb) = b.entries.get(k).and_then(|e| e.best_expanded) else {
            continue;
        };
        h.shared += 1;
        match xa.cmp(&xb) {
            std::cmp::Ordering::Less => {
                h.wins += 1;
                improvement += (xb - xa) as f64 / xb as f64 * 100.0;
            }
            std::cmp::Ordering::Equal => h.ties += 1,
            std::cmp::Ordering::Greater => h.losses += 1,
        }
    }
    if h.wins > 0 {
        h.mean_improvement_pct = Some(improvement / h.wins as f64);
    }
    h
}

/// The lower median: element ⌈n/2⌉ of the sorted values.
pub fn lower_median<T: Ord + Copy>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    Some(v[v.len().div_ceil(2) - 1])
}

/// `(expansions, cumulative solved)`, sorted by expansions.
pub fn cactus(vb: &VirtualBest) -> Vec<(u64, usize)> {
    let mut xs: Vec<u64> = vb.solved().map(|(_, x)| x).collect();
    xs.sort_unstable();
    xs.into_iter()
        .enumerate()
        .map(|(i, x)| (x, i + 1))
        .collect()
}

/// Best expansions of two systems on every problem either attempted.
pub fn scatter(a: &VirtualBest, b: &VirtualBest) -> Vec<(ProblemKey, Option<u64>, Option<u64>)> {
    let keys: BTreeSet<&ProblemKey> = a.entries.keys().chain(b.entries.keys()).collect();
    keys.into_iter()
        .map(|k| {
            let get = |vb: &VirtualBest| vb.entries.get(k).and_then(|e| e.best_expanded);
            (k.clone(), get(a), get(b))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianRow {
    /// A domain label, or `None` for all domains pooled.
    pub domain: Option<String>,
    pub system: String,
    pub solved: usize,
    /// Over virtual-best expansions.
    pub pooled: Option<u64>,
    /// Over each algorithm's own solved runs.
    pub per_algorithm: Vec<(Algorithm, Option<u64>)>,
}

/// Median expansions per (domain, system), plus an all-domains row per
/// system.
pub fn medians(
    records: &[RunRecord],
    systems: &[String],
    algorithms: &[Algorithm],
) -> Vec<MedianRow> {
    let domains: BTreeSet<&str> = records.iter().map(|r| r.domain.as_str()).collect();
    let scopes: Vec<Option<&str>> = domains.into_iter().map(Some).chain([None]).collect();
    let mut rows = Vec::new();
    for scope in scopes {
        for s in systems {
            let in_scope = |r: &&RunRecord| &r.system == s && scope.is_none_or(|d| r.domain == d);
            let vb = virtual_best(
                &records.iter().filter(in_scope).cloned().collect::<Vec<_>>(),
                s,
            );
            let pooled: Vec<u64> = vb.solved().map(|(_, x)| x).collect();
            let per_algorithm = algorithms
                .iter()
                .map(|&a| {
                    let xs: Vec<u64> = records
                        .iter()
                        .filter(in_scope)
                        .filter(|r| r.algorithm == a && r.solved())
                        .map(|r| r.expanded)
                        .collect();
                    (a, lower_median(&xs))
                })
                .collect();
            rows.push(MedianRow {
                domain: scope.map(str::to_owned),
                system: s.clone(),
                solved: pooled.len(),
                pooled: lower_median(&pooled),
                per_algorithm,
            });
        }
    }
    rows
}

/// Per domain (and `None` for all domains): the number of problems every
/// system solved and each system's median best plan length on them.
pub fn plan_length_intersection(
    vbs: &[VirtualBest],
) -> Vec<(Option<String>, usize, Vec<Option<usize>>)> {
    let Some(first) = vbs.first() else {
        return Vec::new();
    };
    let common: Vec<&ProblemKey> = first
        .entries
        .iter()
        .filter(|(k, _)| {
            vbs.iter()
                .all(|vb| vb.entries.get(*k).is_some_and(|e| e.solved))
        })
        .map(|(k, _)| k)
        .collect();
    let domains: BTreeSet<&str> = vbs.iter().flat_map(|vb| vb.domains()).collect();
    let scopes: Vec<Option<&str>> = domains.into_iter().map(Some).chain([None]).collect();
    scopes
        .into_iter()
        .map(|scope| {
            let keys: Vec<&ProblemKey> = common
                .iter()
                .copied()
                .filter(|(d, _)| scope.is_none_or(|s| d == s))
                .collect();
            let meds = vbs
                .iter()
                .map(|vb| {
                    let ls: Vec<usize> = keys
                        .iter()
                        .filter_map(|k| vb.entries[*k].best_plan_length)
                        .collect();
                    lower_median(&ls)
                })
                .collect();
            (scope.map(str::to_owned), keys.len(), meds)
        })
        .collect()
}
