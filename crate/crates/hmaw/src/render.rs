//! Plain-text rendering of reports and tables. Percentages carry one
//! decimal place, matching the usual preference-table style.

use hmaw_core::{BenchmarkReport, MetricKind};

use crate::ablate::AblationTable;
use crate::rundir::{RunManifest, TraceFile};

pub fn pct(value: f64) -> String {
    format!("{:.1}%", value * 100.0)
}

pub fn render_report_text(report: &BenchmarkReport, reference_mean: Option<f64>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "dataset: {}    metric: {}    n: {}\n",
        report.dataset,
        match report.metric_kind {
            MetricKind::Preference => "preference",
            MetricKind::Accuracy => "accuracy",
        },
        report.n
    ));
    match report.metric_kind {
        MetricKind::Preference => {
            out.push_str(&format!("candidate (w):    {}\n", pct(report.mean)));
            if let Some(reference) = reference_mean {
                out.push_str(&format!("reference (w/o):  {}\n", pct(reference)));
            }
        }
        MetricKind::Accuracy => {
            out.push_str(&format!("accuracy:         {}\n", pct(report.mean)));
        }
    }
    if let Some(timing) = &report.timing {
        out.push_str(&format!(
            "latency: baseline {:.2} s mean, +{:.2} s extra ({:.2}% overhead)\n",
            timing.mean_baseline_s, timing.mean_overhead_s, timing.overhead_percent
        ));
    }
    if let Some(tokens) = &report.token_totals {
        out.push_str(&format!(
            "tokens: prompt {}, completion {}\n",
            tokens.prompt_tokens, tokens.completion_tokens
        ));
    }
    out
}

pub fn render_ablation_table(table: &AblationTable) -> String {
    let label_width = table
        .rows
        .iter()
        .map(|r| r.label.len())
        .chain(["configuration".len()])
        .max()
        .unwrap_or(13);
    let mut out = String::new();
    out.push_str(&format!(
        "dataset: {}    reference: no-prompting    n: {}\n",
        table.dataset, table.n
    ));
    out.push_str(&format!(
        "{:<label_width$}  {:>6}  {:>6}  {:>11}  {:>12}\n",
        "configuration", "w/o", "w", "calls/query", "mean latency"
    ));
    for row in &table.rows {
        out.push_str(&format!(
            "{:<label_width$}  {:>6}  {:>6}  {:>11}  {:>9.3} s\n",
            row.label,
            pct(row.reference_mean),
            pct(row.candidate_mean),
            row.calls_per_query,
            row.mean_latency_s,
        ));
    }
    out
}

pub fn render_run_summary(
    manifest: Option<&RunManifest>,
    traces: &std::collections::BTreeMap<String, TraceFile>,
) -> String {
    let mut out = String::new();
    if let Some(m) = manifest {
        out.push_str(&format!(
            "run: {}    strategy: {}    model: {}\n",
            m.run_id,
            m.strategy.label(),
            m.backend.model
        ));
        out.push_str(&format!(
            "dataset: {} ({})\n",
            m.dataset.path,
            m.dataset.task_kind
        ));
    }
    let n = traces.len();
    let calls: usize = traces.values().map(|t| t.steps.len()).sum();
    let total_ms: u64 = traces.values().map(|t| t.total_latency_ms).sum();
    out.push_str(&format!(
        "traces: {}    backend calls: {}    mean latency: {:.3} s\n",
        n,
        calls,
        if n > 0 { total_ms as f64 / n as f64 / 1000.0 } else { 0.0 }
    ));
    let mut prompt_tokens = 0u64;
    let mut completion_tokens = 0u64;
    let mut any = false;
    for trace in traces.values() {
        let (p, c) = trace.token_totals();
        any |= p.is_some() || c.is_some();
        prompt_tokens += p.unwrap_or(0);
        completion_tokens += c.unwrap_or(0);
    }
    if any {
        out.push_str(&format!(
            "tokens: prompt {prompt_tokens}, completion {completion_tokens}\n"
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmaw_core::{aggregate, CaseScore, CaseTiming, MetricKind};
    use std::time::Duration;

    #[test]
    fn preference_report_shows_both_sides_with_one_decimal() {
        let report = aggregate(
            "education",
            MetricKind::Preference,
            vec![CaseScore::new("a", 1.0), CaseScore::new("b", 0.5)],
            Some(&[
                CaseTiming {
                    baseline: Duration::from_millis(1000),
                    pipeline: Duration::from_millis(3000),
                },
                CaseTiming {
                    baseline: Duration::from_millis(1000),
                    pipeline: Duration::from_millis(3000),
                },
            ]),
            None,
        )
        .unwrap();
        let text = render_report_text(&report, Some(0.25));
        assert!(text.contains("candidate (w):    75.0%"));
        assert!(text.contains("reference (w/o):  25.0%"));
        assert!(text.contains("200.00% overhead"));
    }

    #[test]
    fn accuracy_report_is_single_sided() {
        let report = aggregate(
            "gsm-like",
            MetricKind::Accuracy,
            vec![CaseScore::new("a", 1.0), CaseScore::new("b", 0.0)],
            None,
            None,
        )
        .unwrap();
        let text = render_report_text(&report, None);
        assert!(text.contains("accuracy:         50.0%"));
        assert!(!text.contains("reference"));
    }
}
