//! Records of one pipeline run.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;
use serde::{Deserialize, Serialize};

use crate::role::Role;

/// What one layer saw and said.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub role: Role,
    /// The layer's prompt, byte-equal to the renderer output.
    pub rendered_prompt: String,
    /// The backend's reply: an instruction for the next layer, or the final
    /// answer on the responder step.
    pub backend_reply: String,
    pub latency: Duration,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

/// The full record of one query's trip through a chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowTrace {
    pub query_id: String,
    pub steps: Vec<StepRecord>,
    /// The responder layer's rendered prompt.
    pub optimized_prompt: String,
    /// The responder layer's reply.
    pub final_response: String,
    /// Sum of per-step latencies.
    pub total_latency: Duration,
}

impl WorkflowTrace {
    /// Token totals across steps, when at least one step reported usage.
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
