//! Benchmark cases on disk.
//!
//! One directory per case:
//!
//! ```text
//! <case>/description.txt   first user turn
//! <case>/meta.json         {"language", "verdict", "expectedErrors", "edits", "tags"}
//! <case>/golden.csv        expected colour table (valid cases)
//! <case>/ir.json           recorded plan for runs without a model (optional)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spat_core::plan_ir::parse_llm_output;
use spat_core::validate::Verdict;
use spat_core::{ColorTable, PlanIR};
use spat_gateway::Language;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset {0} contains no cases")]
    Empty(String),
    #[error("cannot read {path}: {message}")]
    Unreadable { path: String, message: String },
    #[error("case {case}: {message}")]
    Invalid { case: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseMeta {
    pub language: Language,
    pub verdict: Verdict,
    #[serde(default)]
    pub expected_errors: Vec<String>,
    /// Follow-up user turns after the description.
    #[serde(default)]
    pub edits: Vec<String>,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub id: String,
    pub dir: PathBuf,
    pub meta: CaseMeta,
    pub description: String,
    pub golden: Option<ColorTable>,
    pub recorded_ir: Option<PlanIR>,
}

impl BenchCase {
    /// User turns in order: the description, then the edits.
    pub fn turns(&self) -> Vec<&str> {
        std::iter::once(self.description.as_str())
            .chain(self.meta.edits.iter().map(String::as_str))
            .collect()
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|e| DatasetError::Unreadable {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_case(dir: &Path) -> Result<BenchCase, DatasetError> {
    let id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let invalid = |message: String| DatasetError::Invalid {
        case: id.clone(),
        message,
    };
    let meta: CaseMeta =
        serde_json::from_str(&read(&dir.join("meta.json"))?).map_err(|e| invalid(e.to_string()))?;
    let description = read(&dir.join("description.txt"))?.trim().to_owned();
    let golden_path = dir.join("golden.csv");
    let golden = if golden_path.exists() {
        Some(
            ColorTable::from_csv(&read(&golden_path)?)
                .map_err(|e| invalid(format!("golden.csv: {e}")))?,
        )
    } else {
        None
    };
    let ir_path = dir.join("ir.json");
    let recorded_ir = if ir_path.exists() {
        Some(
            parse_llm_output(&read(&ir_path)?)
                .map_err(|e| invalid(format!("ir.json: {e}")))?
                .ir,
        )
    } else {
        None
    };
    match meta.verdict {
        Verdict::Valid if golden.is_none() => {
            return Err(invalid("valid case without golden.csv".into()))
        }
        Verdict::Invalid if meta.expected_errors.is_empty() => {
            return Err(invalid("invalid case without expectedErrors".into()))
        }
        _ => {}
    }
    Ok(BenchCase {
        id,
        dir: dir.to_owned(),
        meta,
        description,
        golden,
        recorded_ir,
    })
}

/// Every case directory under `dir` (directories holding a `meta.json`),
/// sorted by name.
pub fn load_dataset(dir: &Path) -> Result<Vec<BenchCase>, DatasetError> {
    let entries = fs::read_dir(dir).map_err(|e| DatasetError::Unreadable {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("meta.json").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(DatasetError::Empty(dir.display().to_string()));
    }
    dirs.iter().map(|d| load_case(d)).collect()
}
