//! Pairwise LLM-judge preference scoring with position debiasing.
//!
//! One case is judged twice with the response order swapped; the candidate
//! earns a point per pass it wins and the score is the average, so a judge
//! that always favors a listing position contributes exactly 0.5.

use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, ChatBackend, ChatRequest, GenerationParams};
use crate::role::Query;

pub use crate::context::DEFAULT_JUDGE_TEMPLATE;

/// Which listed response the judge picked, or that its reply did not parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    First,
    Second,
    Invalid,
}

/// One judging call: the parsed choice and the raw reply it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub preferred: Preference,
    pub raw_reply: String,
}

/// The debiased per-case result. `verdict_a_first` is the pass with the
/// candidate listed first, `verdict_b_first` the swapped pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceScore {
    pub query_id: String,
    pub score: f64,
    pub verdict_a_first: JudgeVerdict,
    pub verdict_b_first: JudgeVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JudgeError {
    #[error("cannot judge an empty response")]
    EmptyResponse,
    #[error("judge template is missing placeholder {0}")]
    MissingPlaceholder(&'static str),
    #[error("judge backend failed on pass {pass}: {source}")]
    Backend { pass: u8, source: BackendError },
}

pub const JUDGE_PLACEHOLDERS: [&str; 3] = ["{{query}}", "{{response_1}}", "{{response_2}}"];

/// Check that a judge template names all three substitution slots.
pub fn validate_judge_template(template: &str) -> Result<(), JudgeError> {
    for ph in JUDGE_PLACEHOLDERS {
        if !template.contains(ph) {
            return Err(JudgeError::MissingPlaceholder(ph));
        }
    }
    Ok(())
}

/// Substitute the placeholders in a judge template. Substituted text is
/// never re-scanned, so responses containing placeholder syntax are safe.
pub fn render_judge_prompt(template: &str, query: &str, first: &str, second: &str) -> String {
    let mut out = String::with_capacity(template.len() + query.len() + first.len() + second.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start..];
        match after.find("}}") {
            Some(end) => {
                let key = &after[..end + 2];
                match key {
                    "{{query}}" => out.push_str(query),
                    "{{response_1}}" => out.push_str(first),
                    "{{response_2}}" => out.push_str(second),
                    other => out.push_str(other),
                }
                rest = &after[end + 2..];
            }
            None => {
                out.push_str(after);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Extract the judge's choice from its reply: a standalone `1` or `2`
/// (neighbors not alphanumeric). Replies mentioning both, or neither,
/// are invalid.
pub fn parse_choice(reply: &str) -> Preference {
    let bytes = reply.as_bytes();
    let mut saw_one = false;
    let mut saw_two = false;
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'1' && b != b'2' {
            continue;
        }
        let prev_alnum = i > 0 && bytes[i - 1].is_ascii_alphanumeric();
        let next_alnum = i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric();
        if prev_alnum || next_alnum {
            continue;
        }
        match b {
            b'1' => saw_one = true,
            _ => saw_two = true,
        }
    }
    match (saw_one, saw_two) {
        (true, false) => Preference::First,
        (false, true) => Preference::Second,
        _ => Preference::Invalid,
    }
}

fn judge_once<B: ChatBackend + ?Sized>(
    judge: &B,
    template: &str,
    query: &Query,
    first: &str,
    second: &str,
    params: &GenerationParams,
) -> Result<JudgeVerdict, BackendError> {
    let prompt = render_judge_prompt(template, &query.text, first, second);
    let response = judge.chat(&ChatRequest::single_user(params, prompt))?;
    Ok(JudgeVerdict {
        preferred: parse_choice(&response.content),
        raw_reply: response.content,
    })
}

/// Ask the judge once which of two responses (listed in the given order)
/// answers the query better.
pub fn judge_pair<B: ChatBackend + ?Sized>(
    judge: &B,
    template: &str,
    query: &Query,
    first: &str,
    second: &str,
    params: &GenerationParams,
) -> Result<JudgeVerdict, JudgeError> {
    if first.trim().is_empty() || second.trim().is_empty() {
        return Err(JudgeError::EmptyResponse);
    }
    judge_once(judge, template, query, first, second, params)
        .map_err(|source| JudgeError::Backend { pass: 1, source })
}

fn judge_with_retry<B: ChatBackend + ?Sized>(
    judge: &B,
    template: &str,
    query: &Query,
    first: &str,
    second: &str,
    params: &GenerationParams,
    retries_on_invalid: u32,
) -> Result<JudgeVerdict, BackendError> {
    let mut verdict = judge_once(judge, template, query, first, second, params)?;
    for _ in 0..retries_on_invalid {
        if verdict.preferred != Preference::Invalid {
            break;
        }
        verdict = judge_once(judge, template, query, first, second, params)?;
    }
    Ok(verdict)
}

/// Judge one case twice with swapped response orders and average the
/// candidate's points. An invalid verdict contributes a neutral 0.5 for
/// its pass, keeping case counts fixed across compared systems.
/// `retries_on_invalid` re-asks a pass whose reply did not parse.
pub fn debiased_preference<B: ChatBackend + ?Sized>(
    judge: &B,
    template: &str,
    query: &Query,
    candidate: &str,
    reference: &str,
    params: &GenerationParams,
    retries_on_invalid: u32,
) -> Result<PreferenceScore, JudgeError> {
    if candidate.trim().is_empty() || reference.trim().is_empty() {
        return Err(JudgeError::EmptyResponse);
    }
    let verdict_a_first = judge_with_retry(
        judge, template, query, candidate, reference, params, retries_on_invalid,
    )
    .map_err(|source| JudgeError::Backend { pass: 1, source })?;
    let verdict_b_first = judge_with_retry(
        judge, template, query, reference, candidate, params, retries_on_invalid,
    )
    .map_err(|source| JudgeError::Backend { pass: 2, source })?;

    let pass1 = match verdict_a_first.preferred {
        Preference::First => 1.0,
        Preference::Second => 0.0,
        Preference::Invalid => 0.5,
    };
    let pass2 = match verdict_b_first.preferred {
        Preference::Second => 1.0,
        Preference::First => 0.0,
        Preference::Invalid => 0.5,
    };

    Ok(PreferenceScore {
        query_id: query.id.clone(),
        score: (pass1 + pass2) / 2.0,
        verdict_a_first,
        verdict_b_first,
    })
}
