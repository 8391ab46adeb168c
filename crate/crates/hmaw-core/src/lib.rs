//! Core engine for hierarchical multi-agent prompt optimization.
//!
//! A chain of role-playing agents (for example CEO → Manager → Worker)
//! rewrites a user query layer by layer: every layer receives a fixed
//! context text, the instruction produced by the layer above it, and
//! optionally the original query, then produces an instruction for the
//! layer below. The last layer answers the user; its fully rendered
//! prompt is the optimized prompt. This crate also carries the scoring
//! side: position-debiased pairwise preference judging for subjective
//! tasks and exact numeric-answer accuracy for objective tasks.
//!
//! The crate is `no_std` (alloc required) and performs no IO. Backends
//! are abstracted behind [`ChatBackend`]; wall-clock latencies are
//! whatever the backend reports. HTTP clients, dataset files, and the
//! CLI live in the companion `hmaw` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod answer;
pub mod backend;
pub mod chain;
pub mod context;
pub mod engine;
pub mod judge;
pub mod prompt;
pub mod report;
pub mod role;
pub mod subset;
pub mod trace;

pub use answer::{extract_numeric_answer, score_objective, CanonicalNumber, GoldError, ObjectiveScore};
pub use backend::{
    BackendError, ChatBackend, ChatMessage, ChatRequest, ChatResponse, GenerationParams,
    MessageRole,
};
pub use chain::{build_chain, Ablation, ChainConfig, ChainError, LayerChain, LayerSpec};
pub use context::{ContextRegistry, ContextVariant};
pub use engine::{run_workflow, WorkflowError};
pub use judge::{
    debiased_preference, judge_pair, parse_choice, render_judge_prompt, validate_judge_template,
    JudgeError, JudgeVerdict, Preference, PreferenceScore, DEFAULT_JUDGE_TEMPLATE,
};
pub use prompt::{apply_baseline, render_prompt, BaselineStrategy, PromptError, UpstreamInstruction};
pub use report::{aggregate, AggregateError, BenchmarkReport, CaseScore, CaseTiming, MetricKind, TimingSummary, TokenTotals};
pub use role::{Query, QueryError, Role, Theme};
pub use subset::{subset_indices, SplitMix64, SubsetError};
pub use trace::{StepRecord, WorkflowTrace};
