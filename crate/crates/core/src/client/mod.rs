//! Vision-chat endpoint client.
//!
//! Requests use the common chat-completions shape: a single user turn whose
//! content is a text part (the prompt) and an `image_url` part carrying the
//! image as a base64 PNG data URL. The bearer token is read from an
//! environment variable and never written anywhere.

pub mod mock;
mod prompt;
mod run;

pub use prompt::{build_prompt, PromptTemplate};
pub use run::{prepare_image, run_evaluation, RunOptions, RunSummary};

use std::time::{Duration, Instant};

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dataset::DatasetError;
use crate::imaging::{io::encode_png, ImageBuffer, ImagingError};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("classification prompts need a label set")]
    MissingLabels,
    #[error("auth error: environment variable `{0}` is not set")]
    MissingToken(String),
    #[error("invalid endpoint config: {0}")]
    InvalidConfig(String),
    #[error("http client setup failed: {0}")]
    Setup(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_token_env: String,
    pub max_concurrent: usize,
    pub retry_limit: u32,
    /// Per-request timeout in seconds.
    pub timeout: f64,
    /// First retry delay in milliseconds; doubles on each further retry.
    pub backoff_ms: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model_name: "gpt-4o".into(),
            auth_token_env: "VLM_API_KEY".into(),
            max_concurrent: 4,
            retry_limit: 3,
            timeout: 60.0,
            backoff_ms: 500,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), ClientError> {
        if self.max_concurrent == 0 {
            return Err(ClientError::InvalidConfig(
                "max_concurrent must be >= 1".into(),
            ));
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(ClientError::InvalidConfig(
                "timeout must be a positive number of seconds".into(),
            ));
        }
        if self.base_url.is_empty() {
            return Err(ClientError::InvalidConfig("base_url is empty".into()));
        }
        Ok(())
    }

    pub fn endpoint_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// Why a query produced no answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    /// 401/403; never retried.
    AuthError(String),
    /// 429; retried.
    RateLimited,
    Timeout,
    MalformedResponse(String),
    /// Any other non-success status; 5xx is retried.
    Http(u16),
    /// Connection-level failure; retried.
    Transport(String),
    /// The image could not be loaded or encoded; no request was sent.
    Image(String),
}

impl FailureReason {
    pub fn is_retryable(&self) -> bool {
        match self {
            FailureReason::RateLimited | FailureReason::Timeout | FailureReason::Transport(_) => {
                true
            }
            FailureReason::Http(status) => *status >= 500,
            _ => false,
        }
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::AuthError(m) => write!(f, "AuthError: {m}"),
            FailureReason::RateLimited => f.write_str("RateLimited"),
            FailureReason::Timeout => f.write_str("Timeout"),
            FailureReason::MalformedResponse(m) => write!(f, "MalformedResponse: {m}"),
            FailureReason::Http(s) => write!(f, "HTTP {s}"),
            FailureReason::Transport(m) => write!(f, "Transport: {m}"),
            FailureReason::Image(m) => write!(f, "Image: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub sample_id: String,
    pub outcome: Result<String, FailureReason>,
    /// Wall time across all attempts, in seconds.
    pub latency: f64,
    pub attempt_count: u32,
}

impl QueryResult {
    pub fn raw_text(&self) -> Option<&str> {
        self.outcome.as_deref().ok()
    }

    pub fn failure_reason(&self) -> Option<&FailureReason> {
        self.outcome.as_ref().err()
    }
}

/// The JSON body sent for one image and prompt.
pub fn chat_request_body(model: &str, prompt: &str, png: &[u8]) -> Value {
    let data_url = format!(
        "data:image/png;base64,{}",
        base64::engine::general_purpose::STANDARD.encode(png)
    );
    json!({
        "model": model,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": prompt},
                {"type": "image_url", "image_url": {"url": data_url}}
            ]
        }]
    })
}

/// Extracts the assistant text from a chat-completions response.
pub fn parse_chat_response(body: &str) -> Result<String, FailureReason> {
    let malformed = |m: &str| FailureReason::MalformedResponse(m.to_string());
    let value: Value = serde_json::from_str(body).map_err(|e| malformed(&e.to_string()))?;
    let content = value
        .pointer("/choices/0/message/content")
        .ok_or_else(|| malformed("missing choices[0].message.content"))?;
    match content {
        Value::String(s) => Ok(s.clone()),
        // Some servers return content as a list of typed parts.
        Value::Array(parts) => {
            let text: Vec<&str> = parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect();
            if text.is_empty() {
                Err(malformed("content has no text parts"))
            } else {
                Ok(text.concat())
            }
        }
        _ => Err(malformed("content is neither a string nor a part list")),
    }
}

/// A blocking client bound to one endpoint.
#[derive(Debug, Clone)]
pub struct VlmClient {
    cfg: EndpointConfig,
    token: Option<String>,
    http: reqwest::blocking::Client,
}

impl VlmClient {
    /// `token` of `None` sends no Authorization header.
    pub fn new(cfg: EndpointConfig, token: Option<String>) -> Result<Self, ClientError> {
        cfg.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout))
            .build()
            .map_err(|e| ClientError::Setup(e.to_string()))?;
        Ok(VlmClient { cfg, token, http })
    }

    /// Reads the token from `cfg.auth_token_env`, failing before any request
    /// is made if it is unset or empty.
    pub fn from_env(cfg: EndpointConfig) -> Result<Self, ClientError> {
        let token = std::env::var(&cfg.auth_token_env)
            .ok()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| ClientError::MissingToken(cfg.auth_token_env.clone()))?;
        VlmClient::new(cfg, Some(token))
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    fn attempt(&self, body: &str) -> Result<String, FailureReason> {
        let mut request = self
            .http
            .post(self.cfg.endpoint_url())
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string());
        if let Some(token) = &self.token {
            request = request.bearer_auth(token);
        }
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                FailureReason::Timeout
            } else {
                FailureReason::Transport(e.to_string())
            }
        })?;
        let status = response.status().as_u16();
        let text = response.text().map_err(|e| {
            if e.is_timeout() {
                FailureReason::Timeout
            } else {
                FailureReason::Transport(e.to_string())
            }
        })?;
        match status {
            200..=299 => parse_chat_response(&text),
            401 | 403 => Err(FailureReason::AuthError(format!("HTTP {status}"))),
            429 => Err(FailureReason::RateLimited),
            _ => Err(FailureReason::Http(status)),
        }
    }

    /// Sends one image with one prompt, retrying transient failures with
    /// exponential backoff up to `retry_limit` extra attempts.
    pub fn query_image(&self, sample_id: &str, image: &ImageBuffer, prompt: &str) -> QueryResult {
        let start = Instant::now();
        let finish = |outcome, attempt_count| QueryResult {
            sample_id: sample_id.to_string(),
            outcome,
            latency: start.elapsed().as_secs_f64(),
            attempt_count,
        };
        let png = match encode_png(image) {
            Ok(png) => png,
            Err(e) => return finish(Err(FailureReason::Image(e.to_string())), 0),
        };
        let body = chat_request_body(&self.cfg.model_name, prompt, &png).to_string();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Ok(text) => return finish(Ok(text), attempts),
                Err(reason) if reason.is_retryable() && attempts <= self.cfg.retry_limit => {
                    let delay = self
                        .cfg
                        .backoff_ms
                        .saturating_mul(1 << (attempts - 1).min(16));
                    std::thread::sleep(Duration::from_millis(delay));
                }
                Err(reason) => return finish(Err(reason), attempts),
            }
        }
    }
}
