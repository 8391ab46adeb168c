//! Backend-neutral chat-completion exchange.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: MessageRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: MessageRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: MessageRole::User,
            content: content.into(),
        }
    }
}

/// One chat-completion call. Serializes to the wire body verbatim:
/// `{model, messages, temperature, max_tokens?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    /// A single-user-message request, the shape every layer call uses.
    pub fn single_user(params: &GenerationParams, content: impl Into<String>) -> ChatRequest {
        ChatRequest {
            model: params.model.clone(),
            messages: alloc::vec![ChatMessage::user(content)],
            temperature: params.temperature,
            max_tokens: params.max_tokens,
        }
    }

    /// Message list must be non-empty and open with system or user.
    pub fn validate(&self) -> Result<(), BackendError> {
        let first = self
            .messages
            .first()
            .ok_or_else(|| BackendError::InvalidRequest(String::from("messages is empty")))?;
        if first.role == MessageRole::Assistant {
            return Err(BackendError::InvalidRequest(String::from(
                "first message must be system or user",
            )));
        }
        if self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest(String::from(
                "temperature must be >= 0",
            )));
        }
        Ok(())
    }

    /// Content of the last message; what scripted backends key on.
    pub fn last_content(&self) -> &str {
        self.messages.last().map(|m| m.content.as_str()).unwrap_or("")
    }
}

/// The assistant's reply plus whatever accounting the backend reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    pub latency: Duration,
    /// How many transport attempts the call took (1 = no retries).
    pub attempts: u32,
}

impl ChatResponse {
    pub fn new(content: impl Into<String>, latency: Duration) -> ChatResponse {
        ChatResponse {
            content: content.into(),
            prompt_tokens: None,
            completion_tokens: None,
            latency,
            attempts: 1,
        }
    }
}

/// Decoding parameters applied to every layer call in a run. Temperature
/// defaults to 0 so scripted runs reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            model: String::from("default"),
            temperature: 0.0,
            max_tokens: None,
        }
    }
}

impl GenerationParams {
    pub fn for_model(model: impl Into<String>) -> GenerationParams {
        GenerationParams {
            model: model.into(),
            ..GenerationParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("malformed reply: {0}")]
    MalformedReply(String),
    #[error("transport failure after {attempts} attempts: {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("endpoint returned status {status}: {detail}")]
    Http { status: u16, detail: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("scripted backend exhausted after {calls} calls")]
    ScriptExhausted { calls: usize },
    #[error("no script entry matches the prompt")]
    NoScriptMatch,
}

/// Anything that can answer a chat request: the HTTP client in the
/// companion crate, or a scripted mock in tests. Implementations take
/// `&self` so one backend can serve concurrent callers.
pub trait ChatBackend {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        (**self).chat(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_serializes_to_wire_shape() {
        let req = ChatRequest {
            model: String::from("mixtral"),
            messages: alloc::vec![ChatMessage::user("hello")],
            temperature: 0.0,
            max_tokens: None,
        };
        let json = serde_json::to_value(&req).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "model": "mixtral",
                "messages": [{"role": "user", "content": "hello"}],
                "temperature": 0.0
            })
        );
    }

    #[test]
    fn max_tokens_serialized_when_present() {
        let mut req = ChatRequest::single_user(&GenerationParams::default(), "x");
        req.max_tokens = Some(128);
        let json = serde_json::to_value(&req).unwrap();
        assert_eq!(json["max_tokens"], 128);
    }

    #[test]
    fn validation_rejects_empty_and_assistant_first() {
        let empty = ChatRequest {
            model: String::from("m"),
            messages: alloc::vec![],
            temperature: 0.0,
            max_tokens: None,
        };
        assert!(matches!(
            empty.validate(),
            Err(BackendError::InvalidRequest(_))
        ));

        let assistant_first = ChatRequest {
            model: String::from("m"),
            messages: alloc::vec![ChatMessage {
                role: MessageRole::Assistant,
                content: String::from("hi"),
            }],
            temperature: 0.0,
            max_tokens: None,
        };
        assert!(assistant_first.validate().is_err());

        let ok = ChatRequest::single_user(&GenerationParams::default(), "hi");
        assert!(ok.validate().is_ok());
    }
}
