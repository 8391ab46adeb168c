//! Deterministic prompt assembly.
//!
//! A layer's prompt is the concatenation, in fixed order, of its context
//! text, the instruction from the layer above (when there is one), and the
//! original user query (for the entry layer always; for later layers only
//! when their skip connection is on). Sections are separated by labeled
//! headers so the pieces stay distinguishable to the agent and byte-exact
//! for tests.

use alloc::string::String;

use crate::chain::LayerSpec;
use crate::role::{Query, Role};

pub const CONTEXT_HEADER: &str = "### Context";
pub const INSTRUCTION_HEADER_PREFIX: &str = "### Instruction from ";
pub const QUERY_HEADER: &str = "### Original user query";

/// The instruction handed down by the previous layer, tagged with who wrote
/// it so the section header can name the sender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpstreamInstruction {
    pub from_role: Role,
    pub text: String,
}

impl UpstreamInstruction {
    pub fn new(from_role: Role, text: impl Into<String>) -> Self {
        UpstreamInstruction {
            from_role,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("layer {role} is not the entry layer but got no upstream instruction")]
    MissingUpstreamInstruction { role: Role },
    #[error("entry layer {role} got an upstream instruction")]
    UnexpectedUpstreamInstruction { role: Role },
}

/// Assemble the prompt for one layer. Identical inputs yield byte-identical
/// output.
pub fn render_prompt(
    layer: &LayerSpec,
    upstream: Option<&UpstreamInstruction>,
    query: &Query,
) -> Result<String, PromptError> {
    match (layer.is_entry, upstream) {
        (false, None) => {
            return Err(PromptError::MissingUpstreamInstruction { role: layer.role })
        }
        (true, Some(_)) => {
            return Err(PromptError::UnexpectedUpstreamInstruction { role: layer.role })
        }
        _ => {}
    }

    let mut out = String::new();
    out.push_str(CONTEXT_HEADER);
    out.push('\n');
    out.push_str(&layer.context_text);

    if let Some(instruction) = upstream {
        out.push_str("\n\n");
        out.push_str(INSTRUCTION_HEADER_PREFIX);
        out.push_str(instruction.from_role.title());
        out.push('\n');
        out.push_str(&instruction.text);
    }

    if layer.is_entry || layer.receives_skip {
        out.push_str("\n\n");
        out.push_str(QUERY_HEADER);
        out.push('\n');
        out.push_str(&query.text);
    }

    Ok(out)
}

/// Single-call comparison arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineStrategy {
    /// The query goes to the model unchanged.
    NoPrompting,
    /// The query with a fixed step-by-step suffix.
    ZeroCot,
}

pub const ZERO_COT_SUFFIX: &str = "Let's think step by step.";

impl BaselineStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineStrategy::NoPrompting => "no-prompting",
            BaselineStrategy::ZeroCot => "zero-cot",
        }
    }

    pub fn parse(s: &str) -> Option<BaselineStrategy> {
        match s.trim().to_ascii_lowercase().as_str() {
            "no-prompting" | "none" => Some(BaselineStrategy::NoPrompting),
            "zero-cot" | "zero-shot-cot" => Some(BaselineStrategy::ZeroCot),
            _ => None,
        }
    }
}

impl core::fmt::Display for BaselineStrategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Render the prompt a baseline strategy sends for a query.
pub fn apply_baseline(strategy: BaselineStrategy, query: &Query) -> String {
    match strategy {
        BaselineStrategy::NoPrompting => query.text.clone(),
        BaselineStrategy::ZeroCot => {
            let mut out = String::with_capacity(query.text.len() + ZERO_COT_SUFFIX.len() + 1);
            out.push_str(&query.text);
            out.push('\n');
            out.push_str(ZERO_COT_SUFFIX);
            out
        }
    }
}
