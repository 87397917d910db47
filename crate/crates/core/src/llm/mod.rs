//! Chat-completion client: pluggable providers, retry with exponential
//! backoff, a content-addressed response cache and bounded batch
//! concurrency.

mod cache;
mod http;
mod mock;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::promptgen::{Message, Prompt};

pub use cache::{cache_key, CacheEntry, ResponseCache};
pub use http::HttpProvider;
pub use mock::{MockError, MockProvider, MockRule, Scripted, ScriptedProvider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub max_inflight: usize,
    pub retry_limit: u32,
    pub timeout_secs: f64,
    /// First backoff delay; attempt `i` waits `backoff_base_ms * 2^i`.
    pub backoff_base_ms: u64,
    pub cache_dir: Option<PathBuf>,
    /// Skip cache reads; fresh answers still overwrite the cache.
    pub bypass_cache: bool,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4o".into(),
            temperature: 0.0,
            max_output_tokens: 4096,
            api_key_env: "OPENAI_API_KEY".into(),
            max_inflight: 4,
            retry_limit: 3,
            timeout_secs: 120.0,
            backoff_base_ms: 500,
            cache_dir: None,
            bypass_cache: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("temperature must be a finite value >= 0, got {0}")]
    Temperature(f64),
    #[error("max_inflight must be at least 1")]
    MaxInflight,
    #[error("retry_limit must be at most 10, got {0}")]
    RetryLimit(u32),
    #[error("max_output_tokens must be positive")]
    MaxTokens,
    #[error("timeout must be positive")]
    Timeout,
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(ConfigError::Temperature(self.temperature));
        }
        if self.max_inflight == 0 {
            return Err(ConfigError::MaxInflight);
        }
        if self.retry_limit > 10 {
            return Err(ConfigError::RetryLimit(self.retry_limit));
        }
        if self.max_output_tokens == 0 {
            return Err(ConfigError::MaxTokens);
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(ConfigError::Timeout);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProviderReply {
    pub text: String,
    pub finish_reason: Option<String>,
    pub usage: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("HTTP {code}: {body}")]
    Status { code: u16, body: String },
    #[error("network: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl TransportError {
    fn is_retryable(&self) -> bool {
        match self {
            TransportError::Status { code, .. } => *code == 408 || *code == 429 || *code >= 500,
            TransportError::Network(_) => true,
            TransportError::Malformed(_) => false,
        }
    }
}

pub trait Provider: Send + Sync {
    fn send(
        &self,
        request: &ChatRequest,
        api_key: Option<&str>,
    ) -> Result<ProviderReply, TransportError>;

    /// Whether requests need the key named by `api_key_env`.
    fn requires_auth(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderError {
    #[error("transient failure after {attempts} attempts: {last}")]
    Transient { attempts: u32, last: String },
    #[error("authentication failed: {message}")]
    Auth { message: String },
    #[error("request rejected: {message}")]
    Rejected { message: String },
    #[error("cache: {message}")]
    Cache { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// Finish reason, token usage, and `truncated` when the answer hit the
    /// output-token limit.
    pub provider_meta: BTreeMap<String, Value>,
    pub cached: bool,
}

pub struct LlmClient {
    provider: Arc<dyn Provider>,
    cfg: ProviderConfig,
    cache: ResponseCache,
    requests: AtomicUsize,
}

impl LlmClient {
    pub fn new(provider: Arc<dyn Provider>, cfg: ProviderConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let cache = ResponseCache::new(cfg.cache_dir.clone());
        Ok(Self {
            provider,
            cfg,
            cache,
            requests: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    /// Requests actually sent to the provider, retries included.
    pub fn requests_sent(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn request_for(&self, prompt: &Prompt) -> ChatRequest {
        ChatRequest {
            messages: prompt.messages(),
            model: self.cfg.model_name.clone(),
            temperature: self.cfg.temperature,
            max_output_tokens: self.cfg.max_output_tokens,
        }
    }

    pub fn complete(&self, prompt: &Prompt) -> Result<Completion, ProviderError> {
        let request = self.request_for(prompt);
        let key = cache_key(&request);
        if !self.cfg.bypass_cache {
            if let Some(hit) = self.cache.get(&key) {
                return Ok(hit.into_completion(true));
            }
        }
        let lock = self.cache.lock_for(&key);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if !self.cfg.bypass_cache {
            if let Some(hit) = self.cache.get(&key) {
                return Ok(hit.into_completion(true));
            }
        }
        let api_key = if self.provider.requires_auth() {
            match std::env::var(&self.cfg.api_key_env) {
                Ok(k) if !k.is_empty() => Some(k),
                _ => {
                    return Err(ProviderError::Auth {
                        message: format!(
                            "environment variable {} is not set",
                            self.cfg.api_key_env
                        ),
                    })
                }
            }
        } else {
            None
        };
        let reply = self.send_with_retry(&request, api_key.as_deref())?;
        let mut meta = BTreeMap::new();
        if let Some(reason) = &reply.finish_reason {
            meta.insert("finish_reason".into(), Value::from(reason.clone()));
            if reason == "length" {
                meta.insert("truncated".into(), Value::Bool(true));
            }
        }
        if !reply.usage.is_empty() {
            meta.insert(
                "usage".into(),
                Value::Object(reply.usage.clone().into_iter().collect()),
            );
        }
        let entry = CacheEntry::new(&request, reply.text, meta);
        self.cache
            .put(&key, &entry)
            .map_err(|e| ProviderError::Cache {
                message: e.to_string(),
            })?;
        Ok(entry.into_completion(false))
    }

    fn send_with_retry(
        &self,
        request: &ChatRequest,
        api_key: Option<&str>,
    ) -> Result<ProviderReply, ProviderError> {
        let mut attempt = 0u32;
        loop {
            self.requests.fetch_add(1, Ordering::SeqCst);
            match self.provider.send(request, api_key) {
                Ok(reply) => return Ok(reply),
                Err(TransportError::Status {
                    code: code @ (401 | 403),
                    body,
                }) => {
                    return Err(ProviderError::Auth {
                        message: format!("HTTP {code}: {body}"),
                    })
                }
                Err(e) if e.is_retryable() && attempt < self.cfg.retry_limit => {
                    let delay = self
                        .cfg
                        .backoff_base_ms
                        .saturating_mul(1u64 << attempt.min(20));
                    log::warn!(
                        "provider attempt {} failed ({e}); retrying in {delay} ms",
                        attempt + 1
                    );
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
                Err(e) if e.is_retryable() => {
                    return Err(ProviderError::Transient {
                        attempts: attempt + 1,
                        last: e.to_string(),
                    })
                }
                Err(e) => {
                    return Err(ProviderError::Rejected {
                        message: e.to_string(),
                    })
                }
            }
        }
    }

    /// Complete every prompt with at most `max_inflight` requests
    /// outstanding. Results are in input order.
    pub fn complete_batch(&self, prompts: &[Prompt]) -> Vec<Result<Completion, ProviderError>> {
        let n = prompts.len();
        if n == 0 {
            return Vec::new();
        }
        let next = AtomicUsize::new(0);
        let workers = self.cfg.max_inflight.min(n);
        let mut slots: Vec<Option<Result<Completion, ProviderError>>> = vec![None; n];
        let results: Vec<Vec<(usize, Result<Completion, ProviderError>)>> =
            std::thread::scope(|s| {
                let handles: Vec<_> = (0..workers)
                    .map(|_| {
                        s.spawn(|| {
                            let mut done = Vec::new();
                            loop {
                                let i = next.fetch_add(1, Ordering::SeqCst);
                                if i >= n {
                                    return done;
                                }
                                done.push((i, self.complete(&prompts[i])));
                            }
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("batch worker panicked"))
                    .collect()
            });
        for (i, r) in results.into_iter().flatten() {
            slots[i] = Some(r);
        }
        slots
            .into_iter()
            .map(|r| r.expect("every index completed"))
            .collect()
    }
}
