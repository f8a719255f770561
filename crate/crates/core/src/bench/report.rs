use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::aggregate::*;
use super::RunRecord;
use crate::search::Algorithm;

const TOTAL: &str = "Total";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn file_label(system: &str) -> String {
    system
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

/// Writes every CSV report for `records` into `out_dir` and returns the
/// paths written, in a fixed order. Systems are ordered by label.
pub fn emit_reports(records: &[RunRecord], out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let systems: Vec<String> = records
        .iter()
        .map(|r| r.system.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let algorithms: Vec<Algorithm> = Algorithm::ALL
        .into_iter()
        .filter(|a| records.iter().any(|r| r.algorithm == *a))
        .collect();
    let vbs: Vec<VirtualBest> = systems.iter().map(|s| virtual_best(records, s)).collect();
    let covs: Vec<Coverage> = vbs.iter().map(coverage).collect();
    let domains: BTreeSet<&str> = records.iter().map(|r| r.domain.as_str()).collect();
    let mut written = Vec::new();
    let header = |first: &[&str]| -> Vec<String> {
        first
            .iter()
            .map(|s| s.to_string())
            .chain(systems.iter().cloned())
            .collect()
    };

    let mut rows: Vec<Vec<String>> = domains
        .iter()
        .map(|d| {
            std::iter::once(d.to_string())
                .chain(
                    covs.iter()
                        .map(|c| c.per_domain.get(*d).copied().unwrap_or(0).to_string()),
                )
                .collect()
        })
        .collect();
    rows.push(
        std::iter::once(TOTAL.to_string())
            .chain(covs.iter().map(|c| c.total.to_string()))
            .collect(),
    );
    let p = out_dir.join("coverage.csv");
    write_csv(&p, &header(&["domain"]), &rows)?;
    written.push(p);

    for (i, a) in vbs.iter().enumerate() {
        for b in &vbs[i + 1..] {
            let rows: Vec<Vec<String>> = scatter(a, b)
                .into_iter()
                .map(|((d, p), xa, xb)| vec![d, p, opt(xa), opt(xb)])
                .collect();
            let p = out_dir.join(format!(
                "scatter_{}_vs_{}.csv",
                file_label(&a.system),
                file_label(&b.system)
            ));
            let h = ["domain", "problem", &a.system, &b.system].map(String::from);
            write_csv(&p, &h, &rows)?;
            written.push(p);
        }
    }

    for vb in &vbs {
        let rows: Vec<Vec<String>> = cactus(vb)
            .into_iter()
            .map(|(x, n)| vec![x.to_string(), n.to_string()])
            .collect();
        let p = out_dir.join(format!("cactus_{}.csv", file_label(&vb.system)));
        write_csv(&p, &["expanded".into(), "solved".into()], &rows)?;
        written.push(p);
    }

    let rows: Vec<Vec<String>> = plan_length_intersection(&vbs)
        .into_iter()
        .map(|(d, n, meds)| {
            [d.unwrap_or_else(|| TOTAL.into()), n.to_string()]
                .into_iter()
                .chain(meds.into_iter().map(opt))
                .collect()
        })
        .collect();
    let p = out_dir.join("plan_length_intersection.csv");
    write_csv(&p, &header(&["domain", "common"]), &rows)?;
    written.push(p);

    let mut rows = Vec::new();
    for a in &vbs {
        for b in &vbs {
            if a.system == b.system {
                continue;
            }
            let h = head_to_head(a, b);
            rows.push(vec![
                a.system.clone(),
                b.system.clone(),
                h.shared.to_string(),
                h.wins.to_string(),
                h.ties.to_string(),
                h.losses.to_string(),
                h.mean_improvement_pct
                    .map(|x| format!("{x:.2}"))
                    .unwrap_or_default(),
            ]);
        }
    }
    let p = out_dir.join("head_to_head.csv");
    let h = [
        "system",
        "versus",
        "shared",
        "wins",
        "ties",
        "losses",
        "mean_improvement_pct",
    ]
    .map(String::from);
    write_csv(&p, &h, &rows)?;
    written.push(p);

    let rows: Vec<Vec<String>> = medians(records, &systems, &algorithms)
        .into_iter()
        .map(|m| {
            [
                m.domain.unwrap_or_else(|| TOTAL.into()),
                m.system,
                m.solved.to_string(),
                opt(m.pooled),
            ]
            .into_iter()
            .chain(m.per_algorithm.into_iter().map(|(_, x)| opt(x)))
            .collect()
        })
        .collect();
    let p = out_dir.join("medians.csv");
    let h: Vec<String> = ["domain", "system", "solved", "virtual_best"]
        .into_iter()
        .map(String::from)
        .chain(algorithms.iter().map(|a| a.as_str().to_owned()))
        .collect();
    write_csv(&p, &h, &rows)?;
    written.push(p);

    Ok(written)
}
