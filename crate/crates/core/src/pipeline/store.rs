use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CandidateId, CandidateRecord, SelectionRecord};

pub const PROMPT_FILE: &str = "prompt.md";
pub const SELECTION_FILE: &str = "selection.json";
pub const SELECTED_FILE: &str = "selected.hel";
pub const TIMINGS_FILE: &str = "timings.jsonl";

/// Wall-clock facts about a candidate, logged apart from its record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub ordinal: usize,
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requested_at_ms: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub received_at_ms: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_time: Option<f64>,
}

impl Timing {
    pub fn request(id: &CandidateId, requested_at: u128, received_at: u128) -> Self {
        Timing {
            ordinal: id.ordinal,
            event: "request".into(),
            requested_at_ms: Some(requested_at),
            received_at_ms: Some(received_at),
            training_time: None,
        }
    }

    pub fn evaluation(r: &CandidateRecord) -> Self {
        Timing {
            ordinal: r.id.ordinal,
            event: "evaluation".into(),
            requested_at_ms: None,
            received_at_ms: None,
            training_time: Some(r.training_time),
        }
    }
}

/// A directory of `cand_<ordinal>.hel` / `cand_<ordinal>.meta.json`
/// pairs plus the selection result.
#[derive(Debug, Clone)]
pub struct CandidateStore {
    dir: PathBuf,
}

impl CandidateStore {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(CandidateStore {
            dir: dir.to_owned(),
        })
    }

    pub fn open(dir: &Path) -> std::io::Result<Self> {
        if !dir.is_dir() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} is not a directory", dir.display()),
            ));
        }
        Ok(CandidateStore {
            dir: dir.to_owned(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn program_path(&self, ordinal: usize) -> PathBuf {
        self.dir.join(format!("cand_{ordinal:02}.hel"))
    }

    pub fn meta_path(&self, ordinal: usize) -> PathBuf {
        self.dir.join(format!("cand_{ordinal:02}.meta.json"))
    }

    pub fn selection_path(&self) -> PathBuf {
        self.dir.join(SELECTION_FILE)
    }

    pub fn selected_program_path(&self) -> PathBuf {
        self.dir.join(SELECTED_FILE)
    }

    pub fn write_prompt(&self, prompt: &str) -> std::io::Result<()> {
        fs::write(self.dir.join(PROMPT_FILE), prompt)
    }

    pub fn write_candidate(&self, r: &CandidateRecord) -> std::io::Result<()> {
        fs::write(
            self.program_path(r.id.ordinal),
            r.program_text.as_deref().unwrap_or(""),
        )?;
        let mut json = serde_json::to_string_pretty(r).map_err(std::io::Error::other)?;
        json.push('\n');
        fs::write(self.meta_path(r.id.ordinal), json)
    }

    /// Every stored record in ordinal order, with programs re-parsed.
    pub fn load_candidates(&self) -> std::io::Result<Vec<CandidateRecord>> {
        let mut metas: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("cand_") && n.ends_with(".meta.json"))
            })
            .collect();
        metas.sort();
        let mut out = Vec::with_capacity(metas.len());
        for p in metas {
            let text = fs::read_to_string(&p)?;
            let mut r: CandidateRecord = serde_json::from_str(&text).map_err(|e| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}: {e}", p.display()),
                )
            })?;
            r.reparse();
            out.push(r);
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Writes `selection.json` and, when a candidate was chosen, its
    /// program as `selected.hel`.
    pub fn write_selection(&self, s: &SelectionRecord) -> std::io::Result<()> {
        let mut json = serde_json::to_string_pretty(s).map_err(std::io::Error::other)?;
        json.push('\n');
        fs::write(self.selection_path(), json)?;
        let selected = self.selected_program_path();
        match s.selected_record().and_then(|r| r.program_text.as_deref()) {
            Some(text) => fs::write(selected, text),
            None if selected.exists() => fs::remove_file(selected),
            None => Ok(()),
        }
    }

    pub fn read_selection(&self) -> std::io::Result<SelectionRecord> {
        let text = fs::read_to_string(self.selection_path())?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn log_timing(&self, t: &Timing) -> std::io::Result<()> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join(TIMINGS_FILE))?;
        let mut line = serde_json::to_string(t).map_err(std::io::Error::other)?;
        line.push('\n');
        f.write_all(line.as_bytes())
    }
}
