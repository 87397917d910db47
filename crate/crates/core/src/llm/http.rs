use std::collections::BTreeMap;
use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatRequest, Provider, ProviderReply, TransportError};
use crate::promptgen::Role;

/// OpenAI-style `chat/completions` endpoint over blocking HTTP.
pub struct HttpProvider {
    endpoint: String,
    client: reqwest::blocking::Client,
    auth: bool,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into(),
            client,
            auth: true,
        })
    }

    /// For local servers that take no key.
    pub fn without_auth(mut self) -> Self {
        self.auth = false;
        self
    }

    pub fn request_body(request: &ChatRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                json!({ "role": role, "content": m.content })
            })
            .collect();
        json!({
            "model": request.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        })
    }

    pub fn parse_reply(body: &str) -> Result<ProviderReply, TransportError> {
        let v: Value =
            serde_json::from_str(body).map_err(|e| TransportError::Malformed(e.to_string()))?;
        let choice = &v["choices"][0];
        let text = choice["message"]["content"]
            .as_str()
            .ok_or_else(|| TransportError::Malformed("missing choices[0].message.content".into()))?
            .to_string();
        let usage: BTreeMap<String, Value> = v["usage"]
            .as_object()
            .map(|o| o.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default();
        Ok(ProviderReply {
            text,
            finish_reason: choice["finish_reason"].as_str().map(str::to_owned),
            usage,
        })
    }
}

impl Provider for HttpProvider {
    fn send(
        &self,
        request: &ChatRequest,
        api_key: Option<&str>,
    ) -> Result<ProviderReply, TransportError> {
        let mut req = self
            .client
            .post(&self.endpoint)
            .json(&Self::request_body(request));
        if let Some(key) = api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .text()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(TransportError::Status {
                code: status,
                body: body.chars().take(500).collect(),
            });
        }
        Self::parse_reply(&body)
    }

    fn requires_auth(&self) -> bool {
        self.auth
    }
}
