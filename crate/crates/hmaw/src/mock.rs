//! Scripted chat backend for tests and offline runs.
//!
//! Never touches the network. Replies come from a script, synthetic
//! latencies and token usage are reported without sleeping, and every
//! request is recorded for assertions.

use std::sync::Mutex;
use std::time::Duration;

use hmaw_core::{BackendError, ChatBackend, ChatRequest, ChatResponse};

/// How the mock chooses its replies.
#[derive(Debug, Clone)]
pub enum Script {
    /// Replay these replies in call order; further calls fail with
    /// `ScriptExhausted`.
    Sequence(Vec<String>),
    /// Reply with the last message's content.
    Echo,
    /// Reply with the value of the first pair whose key occurs in the
    /// prompt; no match fails with `NoScriptMatch`.
    KeyedByPromptSubstring(Vec<(String, String)>),
}

#[derive(Debug, Default)]
struct MockState {
    requests: Vec<ChatRequest>,
    cursor: usize,
}

/// A deterministic [`ChatBackend`]: given the same script and call
/// history it always answers the same way.
#[derive(Debug)]
pub struct MockBackend {
    script: Script,
    latencies: Vec<Duration>,
    usage: Option<(u64, u64)>,
    state: Mutex<MockState>,
}

impl MockBackend {
    pub fn new(script: Script) -> MockBackend {
        MockBackend {
            script,
            latencies: vec![Duration::from_millis(1)],
            usage: None,
            state: Mutex::new(MockState::default()),
        }
    }

    pub fn sequence<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> MockBackend {
        MockBackend::new(Script::Sequence(
            replies.into_iter().map(Into::into).collect(),
        ))
    }

    pub fn echo() -> MockBackend {
        MockBackend::new(Script::Echo)
    }

    pub fn keyed<K: Into<String>, V: Into<String>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> MockBackend {
        MockBackend::new(Script::KeyedByPromptSubstring(
            pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        ))
    }

    /// Report this latency on every call.
    pub fn with_latency(self, latency: Duration) -> MockBackend {
        self.with_latencies([latency])
    }

    /// Report these latencies, cycling when calls outnumber them.
    pub fn with_latencies(mut self, latencies: impl IntoIterator<Item = Duration>) -> MockBackend {
        self.latencies = latencies.into_iter().collect();
        assert!(!self.latencies.is_empty(), "latency list must be non-empty");
        self
    }

    /// Report fixed token usage on every call.
    pub fn with_usage(mut self, prompt_tokens: u64, completion_tokens: u64) -> MockBackend {
        self.usage = Some((prompt_tokens, completion_tokens));
        self
    }

    /// Every request received so far, in call order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.state.lock().unwrap().requests.clone()
    }

    pub fn call_count(&self) -> usize {
        self.state.lock().unwrap().requests.len()
    }
}

impl ChatBackend for MockBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let mut state = self.state.lock().unwrap();
        let call_index = state.requests.len();
        state.requests.push(request.clone());

        let content = match &self.script {
            Script::Sequence(replies) => {
                let reply = replies
                    .get(state.cursor)
                    .ok_or(BackendError::ScriptExhausted { calls: state.cursor })?;
                state.cursor += 1;
                reply.clone()
            }
            Script::Echo => request.last_content().to_string(),
            Script::KeyedByPromptSubstring(pairs) => {
                let prompt = request.last_content();
                pairs
                    .iter()
                    .find(|(key, _)| prompt.contains(key.as_str()))
                    .map(|(_, reply)| reply.clone())
                    .ok_or(BackendError::NoScriptMatch)?
            }
        };

        let latency = self.latencies[call_index % self.latencies.len()];
        let (prompt_tokens, completion_tokens) = match self.usage {
            Some((p, c)) => (Some(p), Some(c)),
            None => (None, None),
        };
        Ok(ChatResponse {
            content,
            prompt_tokens,
            completion_tokens,
            latency,
            attempts: 1,
        })
    }
}
