//! The language-model client contract shared by generation and validation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

/// Env var holding the bearer credential for [`HttpClient`].
pub const API_KEY_ENV: &str = "FORGE_LLM_API_KEY";
/// Env var overriding the endpoint base URL for [`HttpClient`].
pub const ENDPOINT_ENV: &str = "FORGE_LLM_ENDPOINT";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClientError {
    /// Network or server failure; the caller may retry.
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("client misconfigured: {0}")]
    Config(String),
}

/// `model` and `effort` are opaque labels taken from the routing policy.
pub trait LlmClient: Send + Sync {
    fn send(&self, prompt: &str, model: &str, effort: &str) -> Result<String, ClientError>;
}

impl<T: LlmClient + ?Sized> LlmClient for Arc<T> {
    fn send(&self, prompt: &str, model: &str, effort: &str) -> Result<String, ClientError> {
        (**self).send(prompt, model, effort)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for &T {
    fn send(&self, prompt: &str, model: &str, effort: &str) -> Result<String, ClientError> {
        (**self).send(prompt, model, effort)
    }
}

/// Chat-completions client for OpenAI-compatible endpoints.
pub struct HttpClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

impl HttpClient {
    pub fn new(
        endpoint: impl Into<String>,
        api_key: impl Into<String>,
        timeout: Duration,
    ) -> HttpClient {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpClient {
            agent,
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
        }
    }

    /// Reads the credential (and optional endpoint) from the environment.
    pub fn from_env() -> Result<HttpClient, ClientError> {
        let key = std::env::var(API_KEY_ENV)
            .map_err(|_| ClientError::Config(format!("{API_KEY_ENV} is not set")))?;
        let endpoint = std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string());
        Ok(HttpClient::new(endpoint, key, Duration::from_secs(600)))
    }
}

impl LlmClient for HttpClient {
    fn send(&self, prompt: &str, model: &str, effort: &str) -> Result<String, ClientError> {
        let body = serde_json::json!({
            "model": model,
            "reasoning_effort": effort,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut resp = self
            .agent
            .post(format!("{}/chat/completions", self.endpoint))
            .header("Authorization", format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::BadResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ClientError::BadResponse("no message content".into()))
    }
}

/// Counts calls in flight and remembers the peak.
#[derive(Debug, Default)]
pub struct ConcurrencyProbe {
    current: AtomicUsize,
    peak: AtomicUsize,
    total: AtomicUsize,
}

pub struct ProbeGuard<'a>(&'a ConcurrencyProbe);

impl ConcurrencyProbe {
    pub fn enter(&self) -> ProbeGuard<'_> {
        let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        self.total.fetch_add(1, Ordering::SeqCst);
        ProbeGuard(self)
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }

    pub fn total(&self) -> usize {
        self.total.load(Ordering::SeqCst)
    }
}

impl Drop for ProbeGuard<'_> {
    fn drop(&mut self) {
        self.0.current.fetch_sub(1, Ordering::SeqCst);
    }
}
