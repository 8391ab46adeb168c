//! Ablation sweeps: run a list of chain configurations over one dataset,
//! judge each against a shared no-prompting reference, and emit one
//! consolidated comparison table.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hmaw_core::{Ablation, BaselineStrategy, ChainConfig, ChainError, Theme};

use crate::dataset::Dataset;
use crate::evalcmd::{eval_subjective, EvalError, JudgeConfig};
use crate::rundir::{BackendSpec, DatasetRef, RunManifest, StrategySpec};
use crate::runner::{build_strategy, execute_prepared, new_run_id, RunError};

/// One row of a sweep: the default chain, a structural ablation, a layer
/// count, a theme, or the reversed hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationSpec {
    Full,
    Structural(Ablation),
    Layers(usize),
    Theme(Theme),
    Reversed,
}

impl AblationSpec {
    /// Parse one token of the `--ablate` list.
    pub fn parse(token: &str) -> Result<AblationSpec, ChainError> {
        let token = token.trim().to_ascii_lowercase();
        if token == "full" {
            return Ok(AblationSpec::Full);
        }
        if token == "reversed" {
            return Ok(AblationSpec::Reversed);
        }
        if let Some(rest) = token.strip_prefix("layers=") {
            let n: usize = rest
                .parse()
                .map_err(|_| ChainError::UnknownAblation(token.clone()))?;
            return Ok(AblationSpec::Layers(n));
        }
        if let Some(rest) = token.strip_prefix("theme=") {
            return Ok(AblationSpec::Theme(Theme::parse(rest)?));
        }
        Ok(AblationSpec::Structural(Ablation::parse(&token)?))
    }

    pub fn parse_list(list: &str) -> Result<Vec<AblationSpec>, ChainError> {
        list.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(AblationSpec::parse)
            .collect()
    }

    pub fn label(&self) -> String {
        match self {
            AblationSpec::Full => "full".to_string(),
            AblationSpec::Structural(a) => a.name().to_string(),
            AblationSpec::Layers(n) => format!("layers={n}"),
            AblationSpec::Theme(t) => format!("theme={t}"),
            AblationSpec::Reversed => "reversed".to_string(),
        }
    }

    pub fn chain_config(&self) -> ChainConfig {
        match self {
            AblationSpec::Full => ChainConfig::company_default(),
            AblationSpec::Structural(a) => ChainConfig::company_default().with_ablation(*a),
            AblationSpec::Layers(n) => ChainConfig::new(Theme::Company, *n),
            AblationSpec::Theme(t) => ChainConfig::new(*t, 3),
            AblationSpec::Reversed => ChainConfig::company_default().reversed(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub label: String,
    pub candidate_mean: f64,
    pub reference_mean: f64,
    pub calls_per_query: usize,
    pub mean_latency_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationTable {
    pub dataset: String,
    pub n: usize,
    pub rows: Vec<AblationRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("configuration `{label}` failed on {failed} of {total} queries (first: {first})")]
    PartialFailure {
        label: String,
        failed: usize,
        total: usize,
        first: String,
    },
}

pub struct SweepInputs<'a> {
    pub dataset: &'a Dataset,
    pub dataset_path: &'a str,
    pub backend: &'a (dyn hmaw_core::ChatBackend + Sync),
    pub backend_spec: BackendSpec,
    pub judge: &'a (dyn hmaw_core::ChatBackend + Sync),
    pub judge_config: JudgeConfig<'a>,
    pub out_dir: &'a Path,
}

fn manifest_for(inputs: &SweepInputs, strategy: StrategySpec) -> RunManifest {
    RunManifest {
        run_id: new_run_id(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        strategy,
        backend: inputs.backend_spec.clone(),
        dataset: DatasetRef {
            path: inputs.dataset_path.to_string(),
            task_kind: crate::dataset::TaskKind::Subjective,
            limit: None,
            seed: 0,
        },
    }
}

fn run_config(
    inputs: &SweepInputs,
    label: &str,
    strategy_spec: StrategySpec,
) -> Result<std::path::PathBuf, SweepError> {
    let run_dir = inputs.out_dir.join("runs").join(label);
    let manifest = manifest_for(inputs, strategy_spec);
    let strategy = build_strategy(&manifest.strategy)?;
    let summary = execute_prepared(&manifest, inputs.dataset, &strategy, inputs.backend, &run_dir)?;
    if !summary.all_ok() {
        return Err(SweepError::PartialFailure {
            label: label.to_string(),
            failed: summary.failures.len(),
            total: summary.total,
            first: summary.failures[0].error.clone(),
        });
    }
    Ok(run_dir)
}

/// Run every configuration plus the shared no-prompting reference, judge
/// each against the reference, and build the comparison table. Row order
/// follows the spec list. Run directories land under `<out>/runs/<label>`.
pub fn run_sweep(inputs: &SweepInputs, specs: &[AblationSpec]) -> Result<AblationTable, SweepError> {
    let reference_dir = run_config(
        inputs,
        "no-prompting",
        StrategySpec::Baseline {
            baseline: BaselineStrategy::NoPrompting,
        },
    )?;

    let mut rows = Vec::new();
    for spec in specs {
        let label = spec.label();
        let run_dir = run_config(
            inputs,
            &label,
            StrategySpec::Chain {
                config: spec.chain_config(),
                contexts_dir: None,
                context_files: Default::default(),
            },
        )?;
        let artifacts = eval_subjective(&run_dir, &reference_dir, inputs.judge, &inputs.judge_config)?;

        let traces = crate::rundir::read_traces(&run_dir)?;
        let calls_per_query = traces.values().map(|t| t.steps.len()).max().unwrap_or(0);
        let mean_latency_s = traces
            .values()
            .map(|t| t.total_latency_ms as f64 / 1000.0)
            .sum::<f64>()
            / traces.len() as f64;

        rows.push(AblationRow {
            label,
            candidate_mean: artifacts.report.mean,
            reference_mean: artifacts.reference_mean.unwrap_or(1.0 - artifacts.report.mean),
            calls_per_query,
            mean_latency_s,
        });
    }

    Ok(AblationTable {
        dataset: inputs.dataset.name.clone(),
        n: inputs.dataset.len(),
        rows,
    })
}
