//! Run directories: `manifest.json` plus one trace file per query under
//! `traces/`. A manifest and the dataset it names fully determine the
//! prompts a run issues, so a run can be replayed byte-for-byte against a
//! scripted backend.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hmaw_core::{BaselineStrategy, ChainConfig, Query, WorkflowTrace};

use crate::dataset::TaskKind;

/// One layer call as persisted in a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub role: String,
    pub prompt: String,
    pub reply: String,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_tokens: Option<u64>,
}

/// The persisted record of one query's run, self-contained enough for a
/// later judging pass (it carries the query text).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub query_id: String,
    pub query_text: String,
    pub strategy: String,
    pub steps: Vec<TraceStep>,
    pub optimized_prompt: String,
    pub final_response: String,
    pub total_latency_ms: u64,
}

impl TraceFile {
    pub fn from_workflow(query: &Query, strategy: &str, trace: &WorkflowTrace) -> TraceFile {
        TraceFile {
            query_id: trace.query_id.clone(),
            query_text: query.text.clone(),
            strategy: strategy.to_string(),
            steps: trace
                .steps
                .iter()
                .map(|s| TraceStep {
                    role: s.role.title().to_string(),
                    prompt: s.rendered_prompt.clone(),
                    reply: s.backend_reply.clone(),
                    latency_ms: s.latency.as_millis() as u64,
                    prompt_tokens: s.prompt_tokens,
                    completion_tokens: s.completion_tokens,
                })
                .collect(),
            optimized_prompt: trace.optimized_prompt.clone(),
            final_response: trace.final_response.clone(),
            total_latency_ms: trace.total_latency.as_millis() as u64,
        }
    }

    pub fn roles(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.role.as_str()).collect()
    }

    /// Token totals across steps, when any step reported usage.
    pub fn token_totals(&self) -> (Option<u64>, Option<u64>) {
        let mut prompt = None;
        let mut completion = None;
        for step in &self.steps {
            if let Some(p) = step.prompt_tokens {
                *prompt.get_or_insert(0) += p;
            }
            if let Some(c) = step.completion_tokens {
                *completion.get_or_insert(0) += c;
            }
        }
        (prompt, completion)
    }
}

/// What produced the responses in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategySpec {
    Chain {
        config: ChainConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        contexts_dir: Option<String>,
        /// Role slug to template path, applied on top of `contexts_dir`.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        context_files: BTreeMap<String, String>,
    },
    Baseline { baseline: BaselineStrategy },
}

impl StrategySpec {
    /// Short label used in trace files and report rows.
    pub fn label(&self) -> String {
        match self {
            StrategySpec::Chain { config, .. } => {
                let mut label = format!("hmaw-{}-{}", config.theme, config.num_layers);
                if config.reversed {
                    label.push_str("-reversed");
                }
                if let Some(ablation) = config.ablation {
                    label.push('-');
                    label.push_str(ablation.name());
                }
                label
            }
            StrategySpec::Baseline { baseline } => format!("baseline:{baseline}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    pub concurrency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub path: String,
    pub task_kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    pub seed: u64,
}

/// Everything needed to reproduce a run's prompts (modulo backend
/// nondeterminism).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool_version: String,
    pub strategy: StrategySpec,
    pub backend: BackendSpec,
    pub dataset: DatasetRef,
}

#[derive(Debug, thiserror::Error)]
pub enum RunDirError {
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} is not valid JSON: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("run directory {0} has no traces")]
    NoTraces(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunDirError + '_ {
    move |source| RunDirError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Query ids become file names; anything outside `[A-Za-z0-9._-]` is
/// replaced so ids cannot escape the traces directory.
pub fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn traces_dir(run_dir: &Path) -> PathBuf {
    run_dir.join("traces")
}

pub fn manifest_path(run_dir: &Path) -> PathBuf {
    run_dir.join("manifest.json")
}

/// Serialize as pretty JSON with a trailing newline; the byte layout is
/// deterministic for a given value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    text
}

pub fn write_trace(run_dir: &Path, trace: &TraceFile) -> Result<PathBuf, RunDirError> {
    let dir = traces_dir(run_dir);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let path = dir.join(format!("{}.json", sanitize_id(&trace.query_id)));
    fs::write(&path, to_canonical_json(trace)).map_err(io_err(&path))?;
    Ok(path)
}

pub fn write_manifest(run_dir: &Path, manifest: &RunManifest) -> Result<(), RunDirError> {
    fs::create_dir_all(run_dir).map_err(io_err(run_dir))?;
    let path = manifest_path(run_dir);
    fs::write(&path, to_canonical_json(manifest)).map_err(io_err(&path))
}

pub fn read_manifest(run_dir: &Path) -> Result<RunManifest, RunDirError> {
    let path = manifest_path(run_dir);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|source| RunDirError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// All traces in a run directory, keyed by query id.
pub fn read_traces(run_dir: &Path) -> Result<BTreeMap<String, TraceFile>, RunDirError> {
    let dir = traces_dir(run_dir);
    let entries = fs::read_dir(&dir).map_err(io_err(&dir))?;
    let mut traces = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(io_err(&dir))?;
        let path = entry.path();
        if path.extension().map_or(true, |e| e != "json") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let trace: TraceFile =
            serde_json::from_str(&text).map_err(|source| RunDirError::Json {
                path: path.display().to_string(),
                source,
            })?;
        traces.insert(trace.query_id.clone(), trace);
    }
    if traces.is_empty() {
        return Err(RunDirError::NoTraces(run_dir.display().to_string()));
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmaw_core::Theme;

    fn sample_trace(id: &str) -> TraceFile {
        TraceFile {
            query_id: id.to_string(),
            query_text: "what is a gene?".to_string(),
            strategy: "hmaw-company-3".to_string(),
            steps: vec![TraceStep {
                role: "Worker".to_string(),
                prompt: "p".to_string(),
                reply: "r".to_string(),
                latency_ms: 12,
                prompt_tokens: Some(3),
                completion_tokens: Some(4),
            }],
            optimized_prompt: "p".to_string(),
            final_response: "r".to_string(),
            total_latency_ms: 12,
        }
    }

    #[test]
    fn traces_round_trip_through_the_run_dir() {
        let dir = tempfile::tempdir().unwrap();
        write_trace(dir.path(), &sample_trace("q1")).unwrap();
        write_trace(dir.path(), &sample_trace("q2")).unwrap();
        let traces = read_traces(dir.path()).unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces["q1"], sample_trace("q1"));
    }

    #[test]
    fn empty_run_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(traces_dir(dir.path())).unwrap();
        assert!(matches!(
            read_traces(dir.path()),
            Err(RunDirError::NoTraces(_))
        ));
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest {
            run_id: "run-1".to_string(),
            tool_version: "0.1.0".to_string(),
            strategy: StrategySpec::Chain {
                config: ChainConfig::new(Theme::Company, 3),
                contexts_dir: None,
                context_files: Default::default(),
            },
            backend: BackendSpec {
                base_url: "mock:echo".to_string(),
                model: "m".to_string(),
                temperature: 0.0,
                max_tokens: None,
                concurrency: 2,
            },
            dataset: DatasetRef {
                path: "fixtures/subjective.jsonl".to_string(),
                task_kind: TaskKind::Subjective,
                limit: Some(5),
                seed: 7,
            },
        };
        write_manifest(dir.path(), &manifest).unwrap();
        assert_eq!(read_manifest(dir.path()).unwrap(), manifest);
    }

    #[test]
    fn ids_are_sanitized_for_the_filesystem() {
        assert_eq!(sanitize_id("simple-id_1.2"), "simple-id_1.2");
        assert_eq!(sanitize_id("../escape"), ".._escape");
        assert_eq!(sanitize_id("a b/c"), "a_b_c");
    }

    #[test]
    fn strategy_labels() {
        let chain = StrategySpec::Chain {
            config: ChainConfig::new(Theme::Temple, 3).reversed(),
            contexts_dir: None,
            context_files: Default::default(),
        };
        assert_eq!(chain.label(), "hmaw-temple-3-reversed");
        let baseline = StrategySpec::Baseline {
            baseline: BaselineStrategy::ZeroCot,
        };
        assert_eq!(baseline.label(), "baseline:zero-cot");
    }
}
