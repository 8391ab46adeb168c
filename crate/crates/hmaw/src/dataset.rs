//! JSONL benchmark datasets.
//!
//! One object per line: `{"id": ..., "query": ..., "answer": ...?}`.
//! Objective datasets require a numeric `answer` on every record;
//! subjective ones ignore it.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use hmaw_core::{subset_indices, CanonicalNumber, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// Scored by pairwise judge preference.
    Subjective,
    /// Scored by exact numeric answer match; records carry gold answers.
    Objective,
}

impl TaskKind {
    pub fn parse(s: &str) -> Result<TaskKind, DatasetError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "subjective" => Ok(TaskKind::Subjective),
            "objective" => Ok(TaskKind::Objective),
            other => Err(DatasetError::UnknownTaskKind(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Subjective => "subjective",
            TaskKind::Objective => "objective",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub task_kind: TaskKind,
    pub queries: Vec<Query>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Query> {
        self.queries.iter().find(|q| q.id == id)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset file not found: {0}")]
    FileNotFound(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: not a valid record: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("line {line}: empty query text")]
    EmptyQuery { line: usize },
    #[error("line {line}: objective record is missing the gold answer")]
    MissingGoldAnswer { line: usize },
    #[error("line {line}: gold answer `{answer}` is not a number")]
    UnparseableGoldAnswer { line: usize, answer: String },
    #[error("duplicate query id `{0}`")]
    DuplicateId(String),
    #[error("unknown task kind `{0}` (expected subjective or objective)")]
    UnknownTaskKind(String),
    #[error("cannot sample {requested} records from {available}")]
    SubsetTooLarge { requested: usize, available: usize },
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRecord {
    id: String,
    query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    answer: Option<String>,
}

/// Load a JSONL dataset, validating ids, query text, and (for objective
/// tasks) gold answers. Blank lines are allowed; errors carry 1-based
/// line numbers.
pub fn load_jsonl(path: impl AsRef<Path>, task_kind: TaskKind) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            DatasetError::FileNotFound(path.display().to_string())
        } else {
            DatasetError::Io {
                path: path.display().to_string(),
                source: e,
            }
        }
    })?;

    let mut queries = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(line).map_err(|e| DatasetError::MalformedLine {
                line: line_no,
                detail: e.to_string(),
            })?;
        if !seen.insert(record.id.clone()) {
            return Err(DatasetError::DuplicateId(record.id));
        }
        let mut query = Query::new(record.id, record.query)
            .map_err(|_| DatasetError::EmptyQuery { line: line_no })?;
        if let Some(answer) = record.answer {
            if task_kind == TaskKind::Objective && CanonicalNumber::parse(&answer).is_none() {
                return Err(DatasetError::UnparseableGoldAnswer {
                    line: line_no,
                    answer,
                });
            }
            query = query.with_gold(answer);
        } else if task_kind == TaskKind::Objective {
            return Err(DatasetError::MissingGoldAnswer { line: line_no });
        }
        queries.push(query);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Ok(Dataset {
        name,
        task_kind,
        queries,
    })
}

/// Write a dataset back out as JSONL (LF line endings, one record per line).
pub fn save_jsonl(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let mut out = fs::File::create(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    for query in &dataset.queries {
        let record = JsonlRecord {
            id: query.id.clone(),
            query: query.text.clone(),
            answer: query.gold_answer.clone(),
        };
        let line = serde_json::to_string(&record).expect("record serializes");
        writeln!(out, "{line}").map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    Ok(())
}

/// A deterministic pseudo-random subset of `n` records, in dataset order.
/// The same (dataset, n, seed) always selects the same records.
pub fn sample_subset(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset, DatasetError> {
    let indices =
        subset_indices(dataset.queries.len(), n, seed).map_err(|e| match e {
            hmaw_core::SubsetError::TooLarge { requested, available } => {
                DatasetError::SubsetTooLarge { requested, available }
            }
        })?;
    Ok(Dataset {
        name: dataset.name.clone(),
        task_kind: dataset.task_kind,
        queries: indices.into_iter().map(|i| dataset.queries[i].clone()).collect(),
    })
}
