//! Command-line interface: `hmaw run`, `hmaw eval`, `hmaw ablate`,
//! `hmaw report`.
//!
//! Commands take their backend as an argument so tests can inject
//! scripted ones; `main` wires in the HTTP client (or an echo mock when
//! the backend URL is `mock:echo`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use hmaw_core::{
    validate_judge_template, BaselineStrategy, ChatBackend, GenerationParams, Theme,
    DEFAULT_JUDGE_TEMPLATE,
};

use crate::ablate::{run_sweep, AblationSpec, SweepInputs};
use crate::chaincfg::load_chain_config;
use crate::dataset::{load_jsonl, TaskKind};
use crate::evalcmd::{eval_objective, eval_subjective, write_artifacts, JudgeConfig};
use crate::http::{HttpBackend, DEFAULT_BASE_URL, ENV_API_KEY, ENV_BASE_URL};
use crate::mock::MockBackend;
use crate::render::{render_ablation_table, render_report_text, render_run_summary};
use crate::rundir::{
    read_manifest, read_traces, to_canonical_json, BackendSpec, DatasetRef, RunManifest,
    StrategySpec,
};
use crate::runner::{execute_manifest, new_run_id};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARTIAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hmaw",
    version,
    about = "Hierarchical multi-agent prompt optimization: run pipelines, judge results, sweep ablations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a pipeline or baseline over a dataset, writing traces.
    Run(RunArgs),
    /// Score finished runs: judge preference or gold-answer accuracy.
    Eval(EvalArgs),
    /// Run a list of ablation configs and compare them in one table.
    Ablate(AblateArgs),
    /// Summarize a run directory or re-render a report file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSONL dataset: {"id", "query", "answer"?} per line.
    #[arg(long)]
    pub dataset: PathBuf,
    /// subjective | objective
    #[arg(long, default_value = "subjective")]
    pub task_kind: String,
    /// TOML chain configuration file.
    #[arg(long, conflicts_with = "baseline")]
    pub chain_config: Option<PathBuf>,
    /// Run a baseline instead of a chain: no-prompting | zero-cot.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Chain length when no config file is given.
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// company | government | university | temple
    #[arg(long, default_value = "company")]
    pub theme: String,
    /// Invert the roster order (responder stays last).
    #[arg(long)]
    pub reversed: bool,
    /// Structural ablation: drop-ceo | drop-manager | no-skip-manager |
    /// no-skip-worker | no-skips.
    #[arg(long)]
    pub ablate: Option<String>,
    /// Directory of context template overrides (<theme>/<role>.txt).
    #[arg(long)]
    pub contexts_dir: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Run only a seeded random subset of this size.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output run directory (manifest.json + traces/).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// OpenAI-compatible endpoint; also HMAW_BASE_URL. `mock:echo` runs
    /// offline with a backend that echoes each prompt.
    #[arg(long)]
    pub backend_url: Option<String>,
    #[arg(long, default_value = "gpt-3.5-turbo")]
    pub model: String,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    /// Maximum in-flight requests.
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Run directory with the responses being scored.
    #[arg(long)]
    pub candidate: PathBuf,
    /// Reference run directory (subjective preference mode).
    #[arg(long, conflicts_with = "dataset")]
    pub reference: Option<PathBuf>,
    /// Objective dataset with gold answers (accuracy mode).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Judge endpoint; also HMAW_BASE_URL / `mock:echo`.
    #[arg(long)]
    pub backend_url: Option<String>,
    #[arg(long, default_value = "gpt-3.5-turbo")]
    pub judge_model: String,
    /// Judge prompt template file with {{query}}, {{response_1}},
    /// {{response_2}} placeholders.
    #[arg(long)]
    pub judge_template: Option<PathBuf>,
    /// Extra judge attempts when a reply fails to parse.
    #[arg(long, default_value_t = 1)]
    pub judge_retries: u32,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Output directory for report.json / report.jsonl / report.txt.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Comma-separated configurations: full, drop-ceo, drop-manager,
    /// no-skip-manager, no-skip-worker, no-skips, layers=1..6,
    /// theme=company|government|university|temple, reversed.
    #[arg(long, default_value = "full,no-skip-manager,no-skip-worker,no-skips,drop-ceo,drop-manager")]
    pub ablate: String,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, default_value = "gpt-3.5-turbo")]
    pub judge_model: String,
    #[arg(long)]
    pub judge_template: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub judge_retries: u32,
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A run directory (summary) or a report.json file (re-render).
    pub path: PathBuf,
}

/// Resolve the backend URL: flag, then HMAW_BASE_URL, then the OpenAI
/// default.
pub fn resolve_backend_url(flag: Option<&str>) -> String {
    flag.map(str::to_string)
        .or_else(|| std::env::var(ENV_BASE_URL).ok())
        .unwrap_or_else(|| DEFAULT_BASE_URL.to_string())
}

/// Build a backend for a resolved URL. `mock:echo` is an offline echo
/// backend; anything else is the HTTP client with HMAW_API_KEY.
pub fn make_backend(url: &str) -> Box<dyn ChatBackend + Send + Sync> {
    if url == "mock:echo" {
        Box::new(MockBackend::echo())
    } else {
        Box::new(HttpBackend::new(url, std::env::var(ENV_API_KEY).ok()))
    }
}

fn load_judge_template(path: Option<&Path>) -> anyhow::Result<String> {
    let template = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("cannot read judge template {}", p.display()))?,
        None => DEFAULT_JUDGE_TEMPLATE.to_string(),
    };
    validate_judge_template(&template)?;
    Ok(template)
}

fn build_run_manifest(args: &RunArgs, base_url: &str) -> anyhow::Result<RunManifest> {
    let task_kind = TaskKind::parse(&args.task_kind)?;
    let strategy = if let Some(name) = &args.baseline {
        let baseline = BaselineStrategy::parse(name)
            .ok_or_else(|| anyhow::anyhow!("unknown baseline `{name}` (no-prompting | zero-cot)"))?;
        StrategySpec::Baseline { baseline }
    } else if let Some(config_path) = &args.chain_config {
        let loaded = load_chain_config(config_path)?;
        StrategySpec::Chain {
            config: loaded.config,
            contexts_dir: loaded.contexts_dir.map(|p| p.display().to_string()),
            context_files: loaded
                .context_files
                .into_iter()
                .map(|(role, path)| (role, path.display().to_string()))
                .collect(),
        }
    } else {
        let mut config = hmaw_core::ChainConfig::new(Theme::parse(&args.theme)?, args.layers);
        config.reversed = args.reversed;
        config.ablation = args.ablate.as_deref().map(hmaw_core::Ablation::parse).transpose()?;
        StrategySpec::Chain {
            config,
            contexts_dir: args.contexts_dir.as_ref().map(|p| p.display().to_string()),
            context_files: BTreeMap::new(),
        }
    };

    Ok(RunManifest {
        run_id: new_run_id(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        strategy,
        backend: BackendSpec {
            base_url: base_url.to_string(),
            model: args.backend.model.clone(),
            temperature: args.backend.temperature,
            max_tokens: args.backend.max_tokens,
            concurrency: args.backend.concurrency,
        },
        dataset: DatasetRef {
            path: args.dataset.display().to_string(),
            task_kind,
            limit: args.limit,
            seed: args.seed,
        },
    })
}

pub fn cmd_run(args: &RunArgs, backend: &(dyn ChatBackend + Sync)) -> anyhow::Result<u8> {
    let base_url = resolve_backend_url(args.backend.backend_url.as_deref());
    let manifest = build_run_manifest(args, &base_url)?;
    let summary = execute_manifest(&manifest, backend, &args.out)?;
    println!(
        "{}: {} of {} queries completed, traces in {}",
        summary.run_id,
        summary.succeeded,
        summary.total,
        args.out.display()
    );
    if summary.all_ok() {
        Ok(EXIT_OK)
    } else {
        for failure in &summary.failures {
            eprintln!("  failed {}: {}", failure.query_id, failure.error);
        }
        eprintln!(
            "{} of {} queries failed (see failures.json)",
            summary.failures.len(),
            summary.total
        );
        Ok(EXIT_PARTIAL)
    }
}

pub fn cmd_eval(args: &EvalArgs, judge: &(dyn ChatBackend + Sync)) -> anyhow::Result<u8> {
    let artifacts = match (&args.reference, &args.dataset) {
        (Some(reference), None) => {
            let template = load_judge_template(args.judge_template.as_deref())?;
            let config = JudgeConfig {
                template: &template,
                params: GenerationParams::for_model(args.judge_model.clone()),
                retries_on_invalid: args.judge_retries,
                concurrency: args.concurrency,
            };
            eval_subjective(&args.candidate, reference, judge, &config)?
        }
        (None, Some(dataset_path)) => {
            let dataset = load_jsonl(dataset_path, TaskKind::Objective)?;
            eval_objective(&args.candidate, &dataset)?
        }
        _ => bail!("pass exactly one of --reference (subjective) or --dataset (objective)"),
    };
    write_artifacts(&artifacts, &args.out)?;
    print!("{}", render_report_text(&artifacts.report, artifacts.reference_mean));
    println!("written to {}", args.out.display());
    Ok(EXIT_OK)
}

pub fn cmd_ablate(
    args: &AblateArgs,
    backend: &(dyn ChatBackend + Sync),
    judge: &(dyn ChatBackend + Sync),
) -> anyhow::Result<u8> {
    let specs = AblationSpec::parse_list(&args.ablate)?;
    if specs.is_empty() {
        bail!("--ablate list is empty");
    }
    let mut dataset = load_jsonl(&args.dataset, TaskKind::Subjective)?;
    if let Some(limit) = args.limit {
        if limit < dataset.len() {
            dataset = crate::dataset::sample_subset(&dataset, limit, args.seed)?;
        }
    }
    let template = load_judge_template(args.judge_template.as_deref())?;
    let base_url = resolve_backend_url(args.backend.backend_url.as_deref());
    let inputs = SweepInputs {
        dataset: &dataset,
        dataset_path: &args.dataset.display().to_string(),
        backend,
        backend_spec: BackendSpec {
            base_url,
            model: args.backend.model.clone(),
            temperature: args.backend.temperature,
            max_tokens: args.backend.max_tokens,
            concurrency: args.backend.concurrency,
        },
        judge,
        judge_config: JudgeConfig {
            template: &template,
            params: GenerationParams::for_model(args.judge_model.clone()),
            retries_on_invalid: args.judge_retries,
            concurrency: args.backend.concurrency,
        },
        out_dir: &args.out,
    };
    let table = run_sweep(&inputs, &specs)?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("ablation.json"), to_canonical_json(&table))?;
    let text = render_ablation_table(&table);
    std::fs::write(args.out.join("ablation.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

pub fn cmd_report(args: &ReportArgs) -> anyhow::Result<u8> {
    if args.path.is_dir() {
        let manifest = read_manifest(&args.path).ok();
        let traces = read_traces(&args.path)?;
        print!("{}", render_run_summary(manifest.as_ref(), &traces));
        return Ok(EXIT_OK);
    }
    let text = std::fs::read_to_string(&args.path)
        .with_context(|| format!("cannot read {}", args.path.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let report: hmaw_core::BenchmarkReport = serde_json::from_value(doc.clone())?;
    let reference_mean = doc.get("reference_mean").and_then(|v| v.as_f64());
    print!("{}", render_report_text(&report, reference_mean));
    Ok(EXIT_OK)
}

/// Parse and dispatch, building real backends. Returns the process exit
/// code.
pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Run(args) => {
            let url = resolve_backend_url(args.backend.backend_url.as_deref());
            let backend = make_backend(&url);
            cmd_run(args, backend.as_ref())
        }
        Command::Eval(args) => {
            let url = resolve_backend_url(args.backend_url.as_deref());
            let judge = make_backend(&url);
            cmd_eval(args, judge.as_ref())
        }
        Command::Ablate(args) => {
            let url = resolve_backend_url(args.backend.backend_url.as_deref());
            let backend = make_backend(&url);
            let judge = make_backend(&url);
            cmd_ablate(args, backend.as_ref(), judge.as_ref())
        }
        Command::Report(args) => cmd_report(args),
    }
}
