//! Batch execution of a run: dataset in, trace files and a manifest out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hmaw_core::{
    apply_baseline, build_chain, run_workflow, BaselineStrategy, ChainError, ChatBackend,
    ChatRequest, GenerationParams, LayerChain, Query,
};

use crate::chaincfg::{build_registry, ConfigError};
use crate::dataset::{load_jsonl, sample_subset, Dataset, DatasetError};
use crate::pool::bounded_map;
use crate::rundir::{
    write_manifest, write_trace, RunDirError, RunManifest, StrategySpec, TraceFile, TraceStep,
};

/// A built, ready-to-execute strategy.
pub enum Strategy {
    Chain { chain: LayerChain, label: String },
    Baseline(BaselineStrategy),
}

impl Strategy {
    /// How many backend calls one query costs.
    pub fn calls_per_query(&self) -> usize {
        match self {
            Strategy::Chain { chain, .. } => chain.len(),
            Strategy::Baseline(_) => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Strategy::Chain { label, .. } => label.clone(),
            Strategy::Baseline(kind) => format!("baseline:{kind}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    RunDir(#[from] RunDirError),
}

/// One query that could not be completed; the batch carries on.
#[derive(Debug, Clone, serde::Serialize)]
pub struct QueryFailure {
    pub query_id: String,
    pub error: String,
}

#[derive(Debug)]
pub struct RunSummary {
    pub run_id: String,
    pub total: usize,
    pub succeeded: usize,
    pub failures: Vec<QueryFailure>,
}

impl RunSummary {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Build the executable strategy a manifest describes.
pub fn build_strategy(spec: &StrategySpec) -> Result<Strategy, RunError> {
    match spec {
        StrategySpec::Chain {
            config,
            contexts_dir,
            context_files,
        } => {
            let files: BTreeMap<String, PathBuf> = context_files
                .iter()
                .map(|(role, path)| (role.clone(), PathBuf::from(path)))
                .collect();
            let registry =
                build_registry(config, contexts_dir.as_deref().map(Path::new), &files)?;
            let chain = build_chain(config, &registry)?;
            Ok(Strategy::Chain {
                chain,
                label: spec.label(),
            })
        }
        StrategySpec::Baseline { baseline } => Ok(Strategy::Baseline(*baseline)),
    }
}

/// Load the dataset a manifest names, applying its limit and seed.
pub fn load_manifest_dataset(manifest: &RunManifest) -> Result<Dataset, RunError> {
    let dataset = load_jsonl(&manifest.dataset.path, manifest.dataset.task_kind)?;
    match manifest.dataset.limit {
        Some(n) if n < dataset.len() => Ok(sample_subset(&dataset, n, manifest.dataset.seed)?),
        _ => Ok(dataset),
    }
}

fn run_one_query(
    strategy: &Strategy,
    query: &Query,
    backend: &(dyn ChatBackend + Sync),
    params: &GenerationParams,
) -> Result<TraceFile, String> {
    match strategy {
        Strategy::Chain { chain, label } => {
            let trace =
                run_workflow(chain, query, backend, params).map_err(|e| e.to_string())?;
            Ok(TraceFile::from_workflow(query, label, &trace))
        }
        Strategy::Baseline(kind) => {
            let prompt = apply_baseline(*kind, query);
            let request = ChatRequest::single_user(params, prompt.clone());
            let response = backend.chat(&request).map_err(|e| e.to_string())?;
            if response.content.trim().is_empty() {
                return Err("baseline reply was empty".to_string());
            }
            let label = format!("baseline:{kind}");
            Ok(TraceFile {
                query_id: query.id.clone(),
                query_text: query.text.clone(),
                strategy: label.clone(),
                steps: vec![TraceStep {
                    role: label,
                    prompt: prompt.clone(),
                    reply: response.content.clone(),
                    latency_ms: response.latency.as_millis() as u64,
                    prompt_tokens: response.prompt_tokens,
                    completion_tokens: response.completion_tokens,
                }],
                optimized_prompt: prompt,
                final_response: response.content,
                total_latency_ms: response.latency.as_millis() as u64,
            })
        }
    }
}

/// Execute a manifest: run every query under the bounded worker pool and
/// persist `manifest.json` plus `traces/<id>.json`. Per-query failures are
/// collected, not fatal. Given the same manifest, dataset, and a scripted
/// backend whose replies do not depend on call order, the trace files are
/// byte-identical across executions.
pub fn execute_manifest(
    manifest: &RunManifest,
    backend: &(dyn ChatBackend + Sync),
    out_dir: &Path,
) -> Result<RunSummary, RunError> {
    let dataset = load_manifest_dataset(manifest)?;
    let strategy = build_strategy(&manifest.strategy)?;
    execute_prepared(manifest, &dataset, &strategy, backend, out_dir)
}

/// `execute_manifest` with the dataset and strategy already built; used
/// when the caller already holds them (ablation sweeps).
pub fn execute_prepared(
    manifest: &RunManifest,
    dataset: &Dataset,
    strategy: &Strategy,
    backend: &(dyn ChatBackend + Sync),
    out_dir: &Path,
) -> Result<RunSummary, RunError> {
    write_manifest(out_dir, manifest)?;
    let params = GenerationParams {
        model: manifest.backend.model.clone(),
        temperature: manifest.backend.temperature,
        max_tokens: manifest.backend.max_tokens,
    };

    let outcomes = bounded_map(
        dataset.queries.clone(),
        manifest.backend.concurrency,
        |query| {
            let result = run_one_query(strategy, &query, backend, &params);
            (query.id.clone(), result)
        },
    );

    let mut summary = RunSummary {
        run_id: manifest.run_id.clone(),
        total: outcomes.len(),
        succeeded: 0,
        failures: Vec::new(),
    };
    for (query_id, outcome) in outcomes {
        match outcome {
            Ok(trace) => {
                write_trace(out_dir, &trace)?;
                summary.succeeded += 1;
            }
            Err(error) => summary.failures.push(QueryFailure { query_id, error }),
        }
    }
    if !summary.failures.is_empty() {
        let path = out_dir.join("failures.json");
        let body = crate::rundir::to_canonical_json(&summary.failures);
        std::fs::write(&path, body).map_err(|source| RunDirError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(summary)
}

/// A fresh run id: seconds since the epoch plus a counter to keep ids
/// unique within a process.
pub fn new_run_id() -> String {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    format!("run-{secs}-{n}")
}
