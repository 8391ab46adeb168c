//! OpenAI-compatible chat-completions client.
//!
//! Speaks `POST <base_url>/chat/completions` with a bearer token, reads
//! `choices[0].message.content` and the optional `usage` block, and
//! retries rate limits, server errors, and timeouts with exponential
//! backoff. The raw HTTP exchange sits behind [`Transport`] so retry and
//! parsing logic is tested with scripted transports; the default
//! transport is `ureq`.

use std::time::{Duration, Instant};

use serde::Deserialize;

use hmaw_core::{BackendError, ChatBackend, ChatRequest, ChatResponse};

pub const ENV_API_KEY: &str = "HMAW_API_KEY";
pub const ENV_BASE_URL: &str = "HMAW_BASE_URL";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

/// A raw HTTP reply: transport succeeded, whatever the status was.
#[derive(Debug, Clone)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Transport-level failure, before any HTTP status exists.
#[derive(Debug, Clone, thiserror::Error)]
pub enum TransportFailure {
    #[error("timed out")]
    Timeout,
    #[error("{0}")]
    Io(String),
}

/// One HTTP POST, no retries. Implemented by `ureq` for real use and by
/// scripted fakes in tests.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &str,
        timeout: Duration,
    ) -> Result<HttpReply, TransportFailure>;
}

/// Default transport.
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &str,
        timeout: Duration,
    ) -> Result<HttpReply, TransportFailure> {
        let mut request = ureq::post(url)
            .timeout(timeout)
            .set("Content-Type", "application/json");
        if let Some(key) = api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        match request.send_string(body) {
            Ok(response) => {
                let status = response.status();
                let body = response
                    .into_string()
                    .map_err(|e| TransportFailure::Io(e.to_string()))?;
                Ok(HttpReply { status, body })
            }
            Err(ureq::Error::Status(status, response)) => {
                let body = response.into_string().unwrap_or_default();
                Ok(HttpReply { status, body })
            }
            Err(ureq::Error::Transport(t)) => {
                let detail = t.to_string();
                if detail.contains("timed out") || detail.contains("timeout") {
                    Err(TransportFailure::Timeout)
                } else {
                    Err(TransportFailure::Io(detail))
                }
            }
        }
    }
}

/// Which failure classes are retried.
#[derive(Debug, Clone, Copy)]
pub struct RetryClasses {
    pub rate_limited: bool,
    pub server_error: bool,
    pub timeout: bool,
}

/// Exponential backoff: attempt k waits `base_backoff * multiplier^(k-1)`.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff: Duration,
    pub backoff_multiplier: f64,
    pub retry_on: RetryClasses,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_backoff: Duration::from_secs(1),
            backoff_multiplier: 2.0,
            retry_on: RetryClasses {
                rate_limited: true,
                server_error: true,
                timeout: true,
            },
        }
    }
}

impl RetryPolicy {
    /// Same classes and attempt count, but no waiting. For tests.
    pub fn immediate(max_attempts: u32) -> RetryPolicy {
        RetryPolicy {
            max_attempts,
            base_backoff: Duration::ZERO,
            ..RetryPolicy::default()
        }
    }

    fn backoff_for(&self, attempt: u32) -> Duration {
        let factor = self.backoff_multiplier.powi(attempt as i32 - 1);
        Duration::from_secs_f64(self.base_backoff.as_secs_f64() * factor)
    }
}

/// A [`ChatBackend`] over an OpenAI-compatible endpoint.
pub struct HttpBackend {
    base_url: String,
    api_key: Option<String>,
    timeout: Duration,
    retry: RetryPolicy,
    transport: Box<dyn Transport>,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> HttpBackend {
        HttpBackend {
            base_url: base_url.into(),
            api_key,
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
            transport: Box::new(UreqTransport),
        }
    }

    /// Endpoint from `HMAW_BASE_URL` (OpenAI's by default), credentials
    /// from `HMAW_API_KEY`.
    pub fn from_env() -> HttpBackend {
        let base_url =
            std::env::var(ENV_BASE_URL).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        let api_key = std::env::var(ENV_API_KEY).ok();
        HttpBackend::new(base_url, api_key)
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> HttpBackend {
        self.retry = retry;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> HttpBackend {
        self.timeout = timeout;
        self
    }

    pub fn with_transport(mut self, transport: Box<dyn Transport>) -> HttpBackend {
        self.transport = transport;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    #[serde(default)]
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Debug, Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Debug, Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

fn snippet(body: &str) -> String {
    let trimmed = body.trim();
    if trimmed.len() <= 200 {
        trimmed.to_string()
    } else {
        format!("{}...", &trimmed[..200])
    }
}

enum Failure {
    RateLimited,
    ServerError { status: u16, detail: String },
    Timeout,
    Io(String),
}

impl Failure {
    fn retryable(&self, classes: RetryClasses) -> bool {
        match self {
            Failure::RateLimited => classes.rate_limited,
            Failure::ServerError { .. } | Failure::Io(_) => classes.server_error,
            Failure::Timeout => classes.timeout,
        }
    }

    fn into_error(self, attempts: u32) -> BackendError {
        match self {
            Failure::RateLimited => BackendError::RateLimited { attempts },
            Failure::ServerError { status, detail } => BackendError::Http { status, detail },
            Failure::Timeout => BackendError::Timeout { attempts },
            Failure::Io(detail) => BackendError::Transport { attempts, detail },
        }
    }
}

impl ChatBackend for HttpBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        request.validate()?;
        let body = serde_json::to_string(request)
            .map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        let url = format!(
            "{}/chat/completions",
            self.base_url.trim_end_matches('/')
        );

        let start = Instant::now();
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let failure = match self
                .transport
                .post_json(&url, self.api_key.as_deref(), &body, self.timeout)
            {
                Ok(reply) if (200..300).contains(&reply.status) => {
                    return parse_reply(&reply.body, start.elapsed(), attempt);
                }
                Ok(reply) if reply.status == 401 || reply.status == 403 => {
                    return Err(BackendError::Auth(snippet(&reply.body)));
                }
                Ok(reply) if reply.status == 429 => Failure::RateLimited,
                Ok(reply) if reply.status >= 500 => Failure::ServerError {
                    status: reply.status,
                    detail: snippet(&reply.body),
                },
                Ok(reply) => {
                    return Err(BackendError::Http {
                        status: reply.status,
                        detail: snippet(&reply.body),
                    })
                }
                Err(TransportFailure::Timeout) => Failure::Timeout,
                Err(TransportFailure::Io(detail)) => Failure::Io(detail),
            };

            if failure.retryable(self.retry.retry_on) && attempt < self.retry.max_attempts {
                let wait = self.retry.backoff_for(attempt);
                if !wait.is_zero() {
                    std::thread::sleep(wait);
                }
                continue;
            }
            return Err(failure.into_error(attempt));
        }
    }
}

fn parse_reply(body: &str, latency: Duration, attempts: u32) -> Result<ChatResponse, BackendError> {
    let wire: WireResponse = serde_json::from_str(body)
        .map_err(|e| BackendError::MalformedReply(format!("not a completion object: {e}")))?;
    let content = wire
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| {
            BackendError::MalformedReply("reply has no choices[0].message.content".to_string())
        })?;
    let (prompt_tokens, completion_tokens) = match wire.usage {
        Some(u) => (u.prompt_tokens, u.completion_tokens),
        None => (None, None),
    };
    Ok(ChatResponse {
        content,
        prompt_tokens,
        completion_tokens,
        latency,
        attempts,
    })
}
