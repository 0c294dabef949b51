use std::thread;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use super::{truncate_words, BackendError, SummarizerBackend};

/// Prepended to every prompt.
pub const INSTRUCTION: &str = "Summarize in one sentence what the following decompiled function does. \
Comments after the body describe the APIs it calls, notable strings, related code and the behavior of its callees.\n\n";

/// Waits before the first and second retry.
pub const DEFAULT_BACKOFF: [Duration; 2] = [Duration::from_millis(500), Duration::from_secs(2)];

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub url: String,
    pub model: String,
    /// Bearer token, usually read from the environment by the caller.
    pub api_key: Option<String>,
    pub retries: usize,
    /// Delay before retry `i` is `backoff[i]`, the last entry repeating.
    pub backoff: Vec<Duration>,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            url: url.into(),
            model: model.into(),
            api_key: None,
            retries: 2,
            backoff: DEFAULT_BACKOFF.to_vec(),
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    model: &'a str,
    prompt: String,
    max_tokens: usize,
}

/// JSON-over-HTTP completion endpoint.
pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend { config, client })
    }

    fn delay(&self, attempt: usize) -> Duration {
        self.config.backoff.get(attempt).or(self.config.backoff.last()).copied().unwrap_or_default()
    }

    fn post_once(&self, body: &Request<'_>) -> Result<Value, BackendError> {
        let mut req = self.client.post(&self.config.url).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Transport(format!("{} returned {status}", self.config.url)));
        }
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| BackendError::Protocol(format!("response is not JSON: {e}")))
    }
}

/// First string under a `text`, `content` or `response` key, depth first in
/// document order.
fn find_text(v: &Value) -> Option<&str> {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                if let (true, Value::String(s)) = (matches!(k.as_str(), "text" | "content" | "response"), child) {
                    return Some(s);
                }
                if let Some(s) = find_text(child) {
                    return Some(s);
                }
            }
            None
        }
        Value::Array(items) => items.iter().find_map(find_text),
        _ => None,
    }
}

impl SummarizerBackend for HttpBackend {
    fn summarize(&mut self, annotated: &str, budget: usize) -> Result<String, BackendError> {
        let body = Request {
            model: &self.config.model,
            prompt: format!("{INSTRUCTION}{annotated}"),
            // words run a little over one token each
            max_tokens: budget.max(1) * 2,
        };
        let mut attempt = 0;
        let value = loop {
            match self.post_once(&body) {
                Ok(v) => break v,
                Err(BackendError::Transport(msg)) if attempt < self.config.retries => {
                    log::warn!("request failed ({msg}), retrying");
                    thread::sleep(self.delay(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        let text = find_text(&value).ok_or_else(|| BackendError::Protocol("no text field in response".into()))?;
        let line = truncate_words(text, budget);
        if line.is_empty() {
            return Err(BackendError::Protocol("empty text in response".into()));
        }
        Ok(line)
    }
}
