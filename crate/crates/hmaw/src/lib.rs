//! IO, CLI, and file formats for the hierarchical multi-agent prompt
//! workflow: the OpenAI-compatible HTTP backend with retry, a scripted
//! mock backend for tests, JSONL datasets, run directories with traces
//! and manifests, judge-based and accuracy evaluation, and ablation
//! sweeps. The pure pipeline and scoring logic lives in `hmaw-core`,
//! re-exported here as [`core`].

pub use hmaw_core as core;

pub mod ablate;
pub mod chaincfg;
pub mod cli;
pub mod dataset;
pub mod evalcmd;
pub mod http;
pub mod mock;
pub mod pool;
pub mod render;
pub mod rundir;
pub mod runner;
