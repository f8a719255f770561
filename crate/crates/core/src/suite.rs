//! Benchmark suites: one domain file, its problems, and an optional hint
//! block, described by a `manifest.json`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ground::{ground, GroundError, GroundOptions, GroundedModel};
use crate::hddl::{self, LiftedDomain, LiftedProblem};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{path}:{err}")]
    Parse {
        path: PathBuf,
        err: hddl::ParseError,
    },
    #[error("{path}: {err}")]
    Ground { path: PathBuf, err: GroundError },
}

impl SuiteError {
    fn invalid(path: &Path, message: impl Into<String>) -> Self {
        SuiteError::Invalid {
            path: path.to_owned(),
            message: message.into(),
        }
    }
}

/// On-disk form; paths are relative to the manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestFile {
    domain: PathBuf,
    problems: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hints: Option<PathBuf>,
}

/// A loaded manifest with every path resolved and checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteManifest {
    /// Directory name of the suite, used as the domain label in reports.
    pub name: String,
    pub domain: PathBuf,
    /// In manifest order.
    pub problems: Vec<PathBuf>,
    /// Problem used for candidate selection; a member of `problems`.
    pub training: PathBuf,
    pub hints: Option<PathBuf>,
}

impl SuiteManifest {
    /// Loads `path`, which is either a manifest file or a directory holding one.
    pub fn load(path: &Path) -> Result<Self, SuiteError> {
        let file = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_owned()
        };
        let text = fs::read_to_string(&file).map_err(|source| SuiteError::Io {
            path: file.clone(),
            source,
        })?;
        let raw: ManifestFile =
            serde_json::from_str(&text).map_err(|e| SuiteError::invalid(&file, e.to_string()))?;
        let dir = file.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| -> Result<PathBuf, SuiteError> {
            let full = dir.join(p);
            if full.is_file() {
                Ok(full)
            } else {
                Err(SuiteError::invalid(
                    &file,
                    format!("{} does not exist", full.display()),
                ))
            }
        };
        let domain = resolve(&raw.domain)?;
        if raw.problems.is_empty() {
            return Err(SuiteError::invalid(&file, "no problems listed"));
        }
        let problems = raw
            .problems
            .iter()
            .map(|p| resolve(p))
            .collect::<Result<Vec<_>, _>>()?;
        let training = match &raw.training {
            Some(t) => {
                let t = resolve(t)?;
                if !problems.contains(&t) {
                    return Err(SuiteError::invalid(
                        &file,
                        "training problem is not one of the problems",
                    ));
                }
                t
            }
            None => smallest(&problems).map_err(|source| SuiteError::Io {
                path: file.clone(),
                source,
            })?,
        };
        let hints = raw.hints.as_deref().map(resolve).transpose()?;
        let name = dir
            .canonicalize()
            .ok()
            .and_then(|d| d.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "suite".into());
        Ok(SuiteManifest {
            name,
            domain,
            problems,
            training,
            hints,
        })
    }

    /// Every suite under `root`: `root` itself if it holds a manifest,
    /// otherwise its immediate subdirectories that do, by name.
    pub fn discover(root: &Path) -> Result<Vec<Self>, SuiteError> {
        if root.join(MANIFEST_FILE).is_file() || root.is_file() {
            return Ok(vec![Self::load(root)?]);
        }
        let entries = fs::read_dir(root).map_err(|source| SuiteError::Io {
            path: root.to_owned(),
            source,
        })?;
        let mut dirs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(MANIFEST_FILE).is_file())
            .collect();
        dirs.sort();
        if dirs.is_empty() {
            return Err(SuiteError::invalid(root, "no manifest.json found"));
        }
        dirs.iter().map(|d| Self::load(d)).collect()
    }

    /// The largest problem by file size; ties go to the later name.
    pub fn largest(&self) -> Result<PathBuf, SuiteError> {
        let mut best: Option<(u64, &PathBuf)> = None;
        for p in &self.problems {
            let n = file_size(p)?;
            if best.is_none_or(|(b, bp)| (n, p) > (b, bp)) {
                best = Some((n, p));
            }
        }
        Ok(best.map(|(_, p)| p.clone()).expect("manifest has problems"))
    }
}

fn file_size(p: &Path) -> Result<u64, SuiteError> {
    fs::metadata(p)
        .map(|m| m.len())
        .map_err(|source| SuiteError::Io {
            path: p.to_owned(),
            source,
        })
}

/// Smallest file by size, ties broken by lexicographic path.
pub fn smallest(paths: &[PathBuf]) -> std::io::Result<PathBuf> {
    let mut best: Option<(u64, &PathBuf)> = None;
    for p in paths {
        let n = fs::metadata(p)?.len();
        if best.is_none_or(|b| (n, p) < b) {
            best = Some((n, p));
        }
    }
    best.map(|(_, p)| p.clone())
        .ok_or_else(|| std::io::Error::other("empty problem list"))
}

/// Reads planning sources and remembers which files were opened.
#[derive(Debug, Default)]
pub struct SourceReader {
    opened: Mutex<BTreeSet<PathBuf>>,
}

impl SourceReader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read(&self, path: &Path) -> Result<String, SuiteError> {
        self.opened.lock().unwrap().insert(path.to_owned());
        fs::read_to_string(path).map_err(|source| SuiteError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn opened(&self) -> Vec<PathBuf> {
        self.opened.lock().unwrap().iter().cloned().collect()
    }

    pub fn domain(&self, path: &Path) -> Result<LiftedDomain, SuiteError> {
        hddl::parse_domain(&self.read(path)?).map_err(|err| SuiteError::Parse {
            path: path.to_owned(),
            err,
        })
    }

    pub fn problem(&self, path: &Path, domain: &LiftedDomain) -> Result<LiftedProblem, SuiteError> {
        hddl::parse_problem(&self.read(path)?, domain).map_err(|err| SuiteError::Parse {
            path: path.to_owned(),
            err,
        })
    }

    /// Parses and grounds one problem of a domain file.
    pub fn ground(
        &self,
        domain: &Path,
        problem: &Path,
        opts: &GroundOptions,
    ) -> Result<GroundedModel, SuiteError> {
        let d = self.domain(domain)?;
        let p = self.problem(problem, &d)?;
        ground(&d, &p, opts).map_err(|err| SuiteError::Ground {
            path: problem.to_owned(),
            err,
        })
    }
}

/// File stem of a problem path, used as the problem label.
pub fn problem_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(dir: &Path, manifest: &str, files: &[(&str, usize)]) -> PathBuf {
        for (name, size) in files {
            fs::write(dir.join(name), "x".repeat(*size)).unwrap();
        }
        fs::write(dir.join(MANIFEST_FILE), manifest).unwrap();
        dir.to_owned()
    }

    #[test]
    fn training_defaults_to_smallest_then_name() {
        let t = tempfile::tempdir().unwrap();
        let d = suite(
            t.path(),
            r#"{"domain":"d.hddl","problems":["b.hddl","a.hddl","c.hddl"]}"#,
            &[("d.hddl", 1), ("a.hddl", 5), ("b.hddl", 5), ("c.hddl", 9)],
        );
        let m = SuiteManifest::load(&d).unwrap();
        assert_eq!(m.training.file_name().unwrap(), "a.hddl");
        assert_eq!(m.largest().unwrap().file_name().unwrap(), "c.hddl");
        assert_eq!(m.problems.len(), 3);
    }

    #[test]
    fn training_must_be_a_problem() {
        let t = tempfile::tempdir().unwrap();
        let d = suite(
            t.path(),
            r#"{"domain":"d.hddl","problems":["a.hddl"],"training":"b.hddl"}"#,
            &[("d.hddl", 1), ("a.hddl", 1), ("b.hddl", 1)],
        );
        assert!(SuiteManifest::load(&d)
            .unwrap_err()
            .to_string()
            .contains("not one of the problems"));
    }

    #[test]
    fn missing_files_are_reported() {
        let t = tempfile::tempdir().unwrap();
        let d = suite(
            t.path(),
            r#"{"domain":"d.hddl","problems":["a.hddl"]}"#,
            &[("d.hddl", 1)],
        );
        assert!(SuiteManifest::load(&d)
            .unwrap_err()
            .to_string()
            .contains("does not exist"));
    }

    #[test]
    fn reader_records_opened_files() {
        let t = tempfile::tempdir().unwrap();
        let p = t.path().join("f.txt");
        fs::write(&p, "hello").unwrap();
        let r = SourceReader::new();
        assert_eq!(r.read(&p).unwrap(), "hello");
        assert_eq!(r.opened(), vec![p]);
    }
}
