use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ChatRequest, Provider, ProviderReply, TransportError};
use crate::promptgen::Role;

fn last_user(request: &ChatRequest) -> &str {
    request
        .messages
        .iter()
        .rev()
        .find(|m| m.role == Role::User)
        .map(|m| m.content.as_str())
        .unwrap_or("")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    /// Every substring must occur in the final user message.
    #[serde(default)]
    pub contains: Vec<String>,
    #[serde(default)]
    pub response: Option<String>,
    /// Path relative to the fixture directory.
    #[serde(default)]
    pub response_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct MockFile {
    rules: Vec<MockRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum MockError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("rule {0} has neither `response` nor `response_file`")]
    EmptyRule(usize),
}

/// Deterministic provider answering from `<dir>/mock.json`. The first rule
/// whose substrings all occur in the last user message wins; a request
/// matching no rule is rejected with HTTP 404.
#[derive(Debug)]
pub struct MockProvider {
    rules: Vec<(Vec<String>, String)>,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn from_dir(dir: &Path) -> Result<Self, MockError> {
        let path = dir.join("mock.json");
        let text = std::fs::read_to_string(&path).map_err(|source| MockError::Io {
            path: path.clone(),
            source,
        })?;
        let file: MockFile = serde_json::from_str(&text).map_err(|source| MockError::Json {
            path: path.clone(),
            source,
        })?;
        let mut rules = Vec::with_capacity(file.rules.len());
        for (i, rule) in file.rules.into_iter().enumerate() {
            let response = match (rule.response, rule.response_file) {
                (Some(r), _) => r,
                (None, Some(f)) => {
                    let p = dir.join(f);
                    std::fs::read_to_string(&p)
                        .map_err(|source| MockError::Io { path: p, source })?
                }
                (None, None) => return Err(MockError::EmptyRule(i)),
            };
            rules.push((rule.contains, response));
        }
        Ok(Self::from_rules(rules))
    }

    pub fn from_rules(rules: Vec<(Vec<String>, String)>) -> Self {
        Self {
            rules,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Provider for MockProvider {
    fn send(
        &self,
        request: &ChatRequest,
        _api_key: Option<&str>,
    ) -> Result<ProviderReply, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let user = last_user(request);
        self.rules
            .iter()
            .find(|(needles, _)| needles.iter().all(|n| user.contains(n.as_str())))
            .map(|(_, text)| ProviderReply {
                text: text.clone(),
                finish_reason: Some("stop".into()),
                ..Default::default()
            })
            .ok_or_else(|| TransportError::Status {
                code: 404,
                body: "no mock rule matches the request".into(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scripted {
    Reply(String),
    Status(u16),
}

/// Test provider: plays a fixed script of replies and HTTP failures, then
/// echoes the last user message. Records call counts and the peak number of
/// concurrent requests.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    script: Mutex<VecDeque<Scripted>>,
    fail_on: Vec<String>,
    delay: Duration,
    finish_reason: Option<String>,
    auth: bool,
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

impl ScriptedProvider {
    pub fn echo() -> Self {
        Self::default()
    }

    pub fn with_script(self, steps: Vec<Scripted>) -> Self {
        *self.script.lock().unwrap() = steps.into();
        self
    }

    /// Requests whose last user message contains `needle` get HTTP 400.
    pub fn failing_on(mut self, needle: &str) -> Self {
        self.fail_on.push(needle.to_string());
        self
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_finish_reason(mut self, reason: &str) -> Self {
        self.finish_reason = Some(reason.to_string());
        self
    }

    pub fn requiring_auth(mut self) -> Self {
        self.auth = true;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn peak_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

impl Provider for ScriptedProvider {
    fn send(
        &self,
        request: &ChatRequest,
        _api_key: Option<&str>,
    ) -> Result<ProviderReply, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let user = last_user(request);
        let step = self.script.lock().unwrap().pop_front();
        let result = if self.fail_on.iter().any(|n| user.contains(n.as_str())) {
            Err(TransportError::Status {
                code: 400,
                body: "scripted failure".into(),
            })
        } else {
            match step {
                Some(Scripted::Status(code)) => Err(TransportError::Status {
                    code,
                    body: "scripted".into(),
                }),
                Some(Scripted::Reply(text)) => Ok(text),
                None => Ok(user.to_string()),
            }
            .map(|text| ProviderReply {
                text,
                finish_reason: self.finish_reason.clone(),
                ..Default::default()
            })
        };
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        result
    }

    fn requires_auth(&self) -> bool {
        self.auth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::promptgen::Message;

    fn request(text: &str) -> ChatRequest {
        ChatRequest {
            messages: vec![
                Message {
                    role: Role::User,
                    content: "example mentioning alpha".into(),
                },
                Message {
                    role: Role::User,
                    content: text.into(),
                },
            ],
            model: "m".into(),
            temperature: 0.0,
            max_output_tokens: 1,
        }
    }

    #[test]
    fn fixture_rules_first_match_wins() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.txt"), "from file").unwrap();
        std::fs::write(
            dir.path().join("mock.json"),
            r#"{"rules": [
                {"contains": ["alpha", "beta"], "response": "both"},
                {"contains": ["beta"], "response_file": "b.txt"},
                {"contains": [], "response": "fallback"}
            ]}"#,
        )
        .unwrap();
        let m = MockProvider::from_dir(dir.path()).unwrap();
        assert_eq!(m.send(&request("alpha beta"), None).unwrap().text, "both");
        assert_eq!(m.send(&request("beta"), None).unwrap().text, "from file");
        // Only the final user message is matched.
        assert_eq!(m.send(&request("gamma"), None).unwrap().text, "fallback");
        assert_eq!(m.calls(), 3);
    }

    #[test]
    fn unmatched_request_is_rejected() {
        let m = MockProvider::from_rules(vec![(vec!["x".into()], "y".into())]);
        assert!(matches!(
            m.send(&request("nothing"), None),
            Err(TransportError::Status { code: 404, .. })
        ));
    }

    #[test]
    fn bad_fixture_dir() {
        assert!(MockProvider::from_dir(Path::new("/nonexistent/dir")).is_err());
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("mock.json"),
            r#"{"rules": [{"contains": []}]}"#,
        )
        .unwrap();
        assert!(matches!(
            MockProvider::from_dir(dir.path()),
            Err(MockError::EmptyRule(0))
        ));
    }
}
