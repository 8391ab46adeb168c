//! Per-dataset score aggregation and cost accounting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::time::Duration;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Preference,
    Accuracy,
}

/// One case's contribution to the dataset mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseScore {
    pub query_id: String,
    pub score: f64,
}

impl CaseScore {
    pub fn new(query_id: impl Into<String>, score: f64) -> CaseScore {
        CaseScore {
            query_id: query_id.into(),
            score,
        }
    }
}

/// Per-case wall time of the comparison arm and of the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseTiming {
    pub baseline: Duration,
    pub pipeline: Duration,
}

/// Mean latencies in seconds and the extra cost of the pipeline relative
/// to the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub mean_baseline_s: f64,
    pub mean_overhead_s: f64,
    pub overhead_percent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenTotals {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Aggregate statistics for one dataset run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub metric_kind: MetricKind,
    pub n: usize,
    pub mean: f64,
    pub per_case: Vec<CaseScore>,
    pub timing: Option<TimingSummary>,
    pub token_totals: Option<TokenTotals>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("cannot aggregate an empty score list")]
    EmptyInput,
    #[error("got {scores} scores but {timings} timings")]
    TimingMismatch { scores: usize, timings: usize },
}

/// Fold per-case scores (and optionally timings) into a report. The
/// overhead percentage is the mean extra latency over the mean baseline
/// latency, in percent.
pub fn aggregate(
    dataset: &str,
    metric_kind: MetricKind,
    per_case: Vec<CaseScore>,
    timings: Option<&[CaseTiming]>,
    token_totals: Option<TokenTotals>,
) -> Result<BenchmarkReport, AggregateError> {
    if per_case.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let n = per_case.len();
    let mean = per_case.iter().map(|c| c.score).sum::<f64>() / n as f64;

    let timing = match timings {
        None => None,
        Some(t) => {
            if t.len() != n {
                return Err(AggregateError::TimingMismatch {
                    scores: n,
                    timings: t.len(),
                });
            }
            let mean_baseline_s =
                t.iter().map(|c| c.baseline.as_secs_f64()).sum::<f64>() / n as f64;
            let mean_pipeline_s =
                t.iter().map(|c| c.pipeline.as_secs_f64()).sum::<f64>() / n as f64;
            let mean_overhead_s = mean_pipeline_s - mean_baseline_s;
            let overhead_percent = if mean_baseline_s > 0.0 {
                100.0 * mean_overhead_s / mean_baseline_s
            } else {
                0.0
            };
            Some(TimingSummary {
                mean_baseline_s,
                mean_overhead_s,
                overhead_percent,
            })
        }
    };

    Ok(BenchmarkReport {
        dataset: dataset.to_string(),
        metric_kind,
        n,
        mean,
        per_case,
        timing,
        token_totals,
    })
}
