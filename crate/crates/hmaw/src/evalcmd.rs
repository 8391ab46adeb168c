//! Scoring a finished run: pairwise judge preference against a reference
//! run, or exact-answer accuracy against a gold dataset. Generation and
//! judging are separate phases so responses can be re-judged without
//! re-running the pipeline.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use hmaw_core::{
    aggregate, debiased_preference, score_objective, AggregateError, BenchmarkReport, CaseScore,
    CaseTiming, ChatBackend, GenerationParams, GoldError, JudgeError, MetricKind, Query,
    QueryError, TokenTotals,
};

use crate::dataset::{Dataset, TaskKind};
use crate::pool::bounded_map;
use crate::render::render_report_text;
use crate::rundir::{read_manifest, read_traces, RunDirError, TraceFile};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    RunDir(#[from] RunDirError),
    #[error("query id sets differ: {missing_in_candidate} missing from candidate, {missing_in_reference} missing from reference (e.g. `{example}`)")]
    QueryIdMismatch {
        missing_in_candidate: usize,
        missing_in_reference: usize,
        example: String,
    },
    #[error("query `{0}` has different text in the two runs")]
    QueryTextMismatch(String),
    #[error("query `{id}`: {source}")]
    Judge { id: String, source: JudgeError },
    #[error("query `{id}`: {source}")]
    Gold { id: String, source: GoldError },
    #[error("trace `{id}` is not in the gold dataset")]
    MissingGold { id: String },
    #[error("invalid query in trace: {0}")]
    Query(#[from] QueryError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("dataset is not objective (task kind is {0})")]
    NotObjective(TaskKind),
}

/// Everything one evaluation emits: the aggregate report, the reference
/// side's mean (preference mode), and per-case rows for the JSONL export.
pub struct EvalArtifacts {
    pub report: BenchmarkReport,
    pub reference_mean: Option<f64>,
    pub per_case_rows: Vec<serde_json::Value>,
}

pub struct JudgeConfig<'a> {
    pub template: &'a str,
    pub params: GenerationParams,
    pub retries_on_invalid: u32,
    pub concurrency: usize,
}

fn token_totals_of(traces: &BTreeMap<String, TraceFile>) -> Option<TokenTotals> {
    let mut totals = TokenTotals::default();
    let mut any = false;
    for trace in traces.values() {
        let (p, c) = trace.token_totals();
        if p.is_some() || c.is_some() {
            any = true;
        }
        totals.prompt_tokens += p.unwrap_or(0);
        totals.completion_tokens += c.unwrap_or(0);
    }
    any.then_some(totals)
}

fn dataset_label(run_dir: &Path) -> String {
    read_manifest(run_dir)
        .ok()
        .map(|m| {
            Path::new(&m.dataset.path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or(m.dataset.path)
        })
        .unwrap_or_else(|| "unknown".to_string())
}

/// Pair the candidate and reference runs case by case, judge each pair
/// twice with swapped orders, and aggregate. The two runs must cover the
/// same query ids with the same query texts.
pub fn eval_subjective(
    candidate_dir: &Path,
    reference_dir: &Path,
    judge: &(dyn ChatBackend + Sync),
    config: &JudgeConfig,
) -> Result<EvalArtifacts, EvalError> {
    let candidate = read_traces(candidate_dir)?;
    let reference = read_traces(reference_dir)?;

    let only_ref: Vec<&String> = reference.keys().filter(|k| !candidate.contains_key(*k)).collect();
    let only_cand: Vec<&String> = candidate.keys().filter(|k| !reference.contains_key(*k)).collect();
    if !only_ref.is_empty() || !only_cand.is_empty() {
        let example = only_ref
            .first()
            .or(only_cand.first())
            .map(|s| s.to_string())
            .unwrap_or_default();
        return Err(EvalError::QueryIdMismatch {
            missing_in_candidate: only_ref.len(),
            missing_in_reference: only_cand.len(),
            example,
        });
    }

    let cases: Vec<(&String, &TraceFile, &TraceFile)> = candidate
        .iter()
        .map(|(id, cand)| (id, cand, &reference[id]))
        .collect();
    for (id, cand, reference) in &cases {
        if cand.query_text != reference.query_text {
            return Err(EvalError::QueryTextMismatch((*id).clone()));
        }
    }

    let scored = bounded_map(cases, config.concurrency, |(id, cand, reference)| {
        let query = Query::new(id.clone(), cand.query_text.clone())?;
        debiased_preference(
            judge,
            config.template,
            &query,
            &cand.final_response,
            &reference.final_response,
            &config.params,
            config.retries_on_invalid,
        )
        .map_err(|source| EvalError::Judge {
            id: id.clone(),
            source,
        })
    });

    let mut per_case = Vec::new();
    let mut rows = Vec::new();
    for result in scored {
        let score = result?;
        per_case.push(CaseScore::new(score.query_id.clone(), score.score));
        rows.push(serde_json::to_value(&score).expect("score serializes"));
    }

    let timings: Vec<CaseTiming> = candidate
        .values()
        .map(|cand| CaseTiming {
            baseline: Duration::from_millis(reference[&cand.query_id].total_latency_ms),
            pipeline: Duration::from_millis(cand.total_latency_ms),
        })
        .collect();

    let report = aggregate(
        &dataset_label(candidate_dir),
        MetricKind::Preference,
        per_case,
        Some(&timings),
        token_totals_of(&candidate),
    )?;
    let reference_mean = 1.0 - report.mean;
    Ok(EvalArtifacts {
        report,
        reference_mean: Some(reference_mean),
        per_case_rows: rows,
    })
}

/// Score a run against the gold answers of an objective dataset.
pub fn eval_objective(run_dir: &Path, dataset: &Dataset) -> Result<EvalArtifacts, EvalError> {
    if dataset.task_kind != TaskKind::Objective {
        return Err(EvalError::NotObjective(dataset.task_kind));
    }
    let traces = read_traces(run_dir)?;

    let mut per_case = Vec::new();
    let mut rows = Vec::new();
    for (id, trace) in &traces {
        let gold = dataset
            .get(id)
            .and_then(|q| q.gold_answer.as_deref())
            .ok_or_else(|| EvalError::MissingGold { id: id.clone() })?;
        let scored = score_objective(id, &trace.final_response, gold)
            .map_err(|source| EvalError::Gold {
                id: id.clone(),
                source,
            })?;
        per_case.push(CaseScore::new(id.clone(), scored.score()));
        rows.push(serde_json::to_value(&scored).expect("score serializes"));
    }

    let report = aggregate(
        &dataset.name,
        MetricKind::Accuracy,
        per_case,
        None,
        token_totals_of(&traces),
    )?;
    Ok(EvalArtifacts {
        report,
        reference_mean: None,
        per_case_rows: rows,
    })
}

/// Write `report.json`, `report.jsonl` (per-case rows), and `report.txt`.
pub fn write_artifacts(artifacts: &EvalArtifacts, out_dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut doc = serde_json::to_value(&artifacts.report).expect("report serializes");
    if let Some(reference_mean) = artifacts.reference_mean {
        doc["reference_mean"] = serde_json::json!(reference_mean);
    }
    let mut json = serde_json::to_string_pretty(&doc).expect("doc serializes");
    json.push('\n');
    std::fs::write(out_dir.join("report.json"), json)?;

    let mut jsonl = String::new();
    for row in &artifacts.per_case_rows {
        jsonl.push_str(&serde_json::to_string(row).expect("row serializes"));
        jsonl.push('\n');
    }
    std::fs::write(out_dir.join("report.jsonl"), jsonl)?;

    std::fs::write(
        out_dir.join("report.txt"),
        render_report_text(&artifacts.report, artifacts.reference_mean),
    )?;
    Ok(())
}
