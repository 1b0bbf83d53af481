//! Planner backend for any endpoint speaking the chat-completions JSON
//! protocol: POST `{model, temperature, messages}`, read
//! `choices[0].message.content`.

use std::time::Duration;

use actune_core::backend::{BackendError, PlannerBackend, PlannerSession, Request};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_TOKEN_ENV: &str = "ACTUNE_API_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatWireConfig {
    /// Full URL the requests are POSTed to.
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    /// Environment variable holding the bearer token; empty for none.
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Corrections per request the orchestrator may ask for.
    #[serde(default = "default_reprompts")]
    pub max_reprompts: usize,
    /// Approximate token budget of a conversation (characters / 4).
    #[serde(default = "default_context")]
    pub max_context_tokens: usize,
    #[serde(default = "default_attempts")]
    pub attempts: usize,
    /// Delay before the first retry; doubled for each further one.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub system_prompt: Option<String>,
}

fn default_token_env() -> String {
    DEFAULT_TOKEN_ENV.into()
}
fn default_timeout() -> f64 {
    120.0
}
fn default_reprompts() -> usize {
    3
}
fn default_context() -> usize {
    128_000
}
fn default_attempts() -> usize {
    3
}
fn default_backoff() -> u64 {
    500
}

impl ChatWireConfig {
    pub fn new(base_url: &str, model: &str) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            temperature: 0.0,
            token_env: default_token_env(),
            timeout_secs: default_timeout(),
            max_reprompts: default_reprompts(),
            max_context_tokens: default_context(),
            attempts: default_attempts(),
            backoff_ms: default_backoff(),
            system_prompt: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, BackendError> {
        let cfg: Self = toml::from_str(text).map_err(|e| BackendError::Config(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), BackendError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::Config(format!("temperature {} is outside [0, 2]", self.temperature)));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(BackendError::Config("timeout_secs must be positive".into()));
        }
        if self.attempts == 0 {
            return Err(BackendError::Config("attempts must be at least 1".into()));
        }
        if self.base_url.trim().is_empty() || self.model.trim().is_empty() {
            return Err(BackendError::Config("base_url and model are required".into()));
        }
        Ok(())
    }

    fn token(&self) -> Result<Option<String>, BackendError> {
        if self.token_env.is_empty() {
            return Ok(None);
        }
        std::env::var(&self.token_env)
            .map(Some)
            .map_err(|_| BackendError::Config(format!("environment variable {} is not set", self.token_env)))
    }
}

/// Rough token count: a quarter of the character count.
pub fn approx_tokens(messages: &[(String, String)]) -> usize {
    messages.iter().map(|(_, c)| c.chars().count()).sum::<usize>().div_ceil(4)
}

fn client(cfg: &ChatWireConfig) -> Result<reqwest::blocking::Client, BackendError> {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs_f64(cfg.timeout_secs))
        .build()
        .map_err(|e| BackendError::Transport(e.to_string()))
}

fn body(cfg: &ChatWireConfig, messages: &[(String, String)]) -> Value {
    let msgs: Vec<Value> = messages.iter().map(|(r, c)| serde_json::json!({ "role": r, "content": c })).collect();
    serde_json::json!({ "model": cfg.model, "temperature": cfg.temperature, "messages": msgs })
}

fn first_content(text: &str) -> Result<String, BackendError> {
    let v: Value = serde_json::from_str(text).map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(String::from)
        .ok_or_else(|| BackendError::MalformedResponse("no choices[0].message.content".into()))
}

fn send(
    http: &reqwest::blocking::Client,
    cfg: &ChatWireConfig,
    token: Option<&str>,
    messages: &[(String, String)],
) -> Result<String, BackendError> {
    let payload = body(cfg, messages);
    let mut last = BackendError::Transport("no attempt made".into());
    for attempt in 0..cfg.attempts {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16))));
        }
        let mut req = http.post(&cfg.base_url).json(&payload);
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                last = BackendError::Transport(e.to_string());
                continue;
            }
        };
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()));
        if status.as_u16() == 429 {
            return Err(BackendError::RateLimited);
        }
        if status.is_server_error() {
            last = BackendError::Transport(format!("HTTP {status}"));
            continue;
        }
        let text = match text {
            Ok(t) => t,
            Err(e) => {
                last = e;
                continue;
            }
        };
        if !status.is_success() {
            return Err(BackendError::Transport(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        return first_content(&text);
    }
    Err(last)
}

/// Sends one conversation and returns the first choice's content.
pub fn chat_complete(cfg: &ChatWireConfig, messages: &[(String, String)]) -> Result<String, BackendError> {
    cfg.check()?;
    let token = cfg.token()?;
    send(&client(cfg)?, cfg, token.as_deref(), messages)
}

#[derive(Debug, Clone)]
pub struct ChatBackend {
    cfg: ChatWireConfig,
}

impl ChatBackend {
    pub fn new(cfg: ChatWireConfig) -> Result<Self, BackendError> {
        cfg.check()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &ChatWireConfig {
        &self.cfg
    }
}

impl PlannerBackend for ChatBackend {
    fn start_session(&self, _run: usize, _seed: u64) -> Result<Box<dyn PlannerSession>, BackendError> {
        let token = self.cfg.token()?;
        let mut transcript = Vec::new();
        if let Some(s) = &self.cfg.system_prompt {
            transcript.push(("system".to_string(), s.clone()));
        }
        Ok(Box::new(ChatSession { http: client(&self.cfg)?, cfg: self.cfg.clone(), token, transcript }))
    }
}

struct ChatSession {
    http: reqwest::blocking::Client,
    cfg: ChatWireConfig,
    token: Option<String>,
    transcript: Vec<(String, String)>,
}

impl PlannerSession for ChatSession {
    fn complete(&mut self, req: &Request) -> Result<String, BackendError> {
        self.transcript.push(("user".into(), req.prompt.to_string()));
        let used = approx_tokens(&self.transcript);
        if used > self.cfg.max_context_tokens {
            self.transcript.pop();
            return Err(BackendError::ContextBudget { used, limit: self.cfg.max_context_tokens });
        }
        match send(&self.http, &self.cfg, self.token.as_deref(), &self.transcript) {
            Ok(reply) => {
                self.transcript.push(("assistant".into(), reply.clone()));
                Ok(reply)
            }
            Err(e) => {
                self.transcript.pop();
                Err(e)
            }
        }
    }

    fn transcript(&self) -> &[(String, String)] {
        &self.transcript
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_bounds() {
        let mut c = ChatWireConfig::new("http://localhost:1/v1/chat/completions", "m");
        assert!(c.check().is_ok());
        c.temperature = 2.5;
        assert!(c.check().is_err());
        c.temperature = 0.7;
        c.timeout_secs = 0.0;
        assert!(c.check().is_err());
    }

    #[test]
    fn toml_defaults() {
        let c = ChatWireConfig::from_toml("base_url = \"http://x/v1/chat/completions\"\nmodel = \"m\"\n").unwrap();
        assert_eq!(c.token_env, DEFAULT_TOKEN_ENV);
        assert_eq!(c.attempts, 3);
        assert!(ChatWireConfig::from_toml("base_url = \"x\"\nmodel = \"m\"\ncolour = 1\n").is_err());
    }

    #[test]
    fn token_estimate() {
        assert_eq!(approx_tokens(&[("user".into(), "abcdefgh".into()), ("assistant".into(), "x".into())]), 3);
        assert_eq!(approx_tokens(&[]), 0);
    }

    #[test]
    fn content_extraction() {
        assert_eq!(first_content(r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#).unwrap(), "hi");
        assert!(matches!(first_content("<html>"), Err(BackendError::MalformedResponse(_))));
        assert!(matches!(first_content(r#"{"choices":[]}"#), Err(BackendError::MalformedResponse(_))));
    }
}
