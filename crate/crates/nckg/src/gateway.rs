//! Chat-completion gateway with two backends: a live HTTP client using
//! the common chat-completions JSON shape, and a deterministic mock
//! driven by a script file for offline runs.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::templates::TemplateId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    /// Which prompt template produced this request; lets the mock
    /// backend match by template instead of exact prompt bytes.
    pub template: Option<TemplateId>,
}

impl ChatRequest {
    /// Single-user-message request at temperature 0, the shape every
    /// pipeline call uses.
    pub fn prompt(model: impl Into<String>, prompt: impl Into<String>, template: TemplateId) -> Self {
        ChatRequest {
            model: model.into(),
            messages: vec![ChatMessage { role: "user".to_string(), content: prompt.into() }],
            temperature: 0.0,
            max_tokens: None,
            template: Some(template),
        }
    }

    /// Stable identity of the prompt: SHA-256 over the concatenated
    /// message contents, lowercase hex.
    pub fn prompt_sha256(&self) -> String {
        let mut hasher = Sha256::new();
        for message in &self.messages {
            hasher.update(message.content.as_bytes());
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: String,
    pub usage: Usage,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("environment variable {0} is not set (it must hold the API key)")]
    MissingApiKey(String),
    #[error("request timed out")]
    Timeout,
    #[error("HTTP status {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("mock script has no entry for prompt sha256 {hash} (template {template})")]
    MockMiss { hash: String, template: String },
    #[error("mock script error: {0}")]
    Script(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockMatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockEntry {
    #[serde(rename = "match")]
    pub matcher: MockMatch,
    pub response: String,
}

enum BackendImpl {
    Http {
        endpoint: String,
        api_key: String,
        agent: ureq::Agent,
    },
    Mock {
        entries: Vec<MockEntry>,
    },
}

impl fmt::Debug for BackendImpl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendImpl::Http { endpoint, .. } => {
                f.debug_struct("Http").field("endpoint", endpoint).finish()
            }
            BackendImpl::Mock { entries } => {
                f.debug_struct("Mock").field("entries", &entries.len()).finish()
            }
        }
    }
}

/// A configured completion backend with retry policy.
#[derive(Debug)]
pub struct Gateway {
    backend: BackendImpl,
    max_retries: u32,
    backoff_base: Duration,
}

impl Gateway {
    pub fn http(
        endpoint: impl Into<String>,
        api_key: impl Into<String>,
        timeout: Duration,
        max_retries: u32,
    ) -> Self {
        let config = ureq::config::Config::builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Gateway {
            backend: BackendImpl::Http {
                endpoint: endpoint.into(),
                api_key: api_key.into(),
                agent: config.new_agent(),
            },
            max_retries,
            backoff_base: Duration::from_secs(1),
        }
    }

    pub fn mock(entries: Vec<MockEntry>) -> Self {
        Gateway {
            backend: BackendImpl::Mock { entries },
            max_retries: 0,
            backoff_base: Duration::ZERO,
        }
    }

    pub fn mock_from_file(path: &Path) -> Result<Self, GatewayError> {
        let text = fs::read_to_string(path)
            .map_err(|e| GatewayError::Script(format!("{}: {e}", path.display())))?;
        let entries: Vec<MockEntry> = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Script(format!("{}: {e}", path.display())))?;
        Ok(Gateway::mock(entries))
    }

    pub fn is_mock(&self) -> bool {
        matches!(self.backend, BackendImpl::Mock { .. })
    }

    /// Shrinks the retry backoff; only useful to keep tests fast.
    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        match &self.backend {
            BackendImpl::Mock { entries } => mock_complete(entries, request),
            BackendImpl::Http { endpoint, api_key, agent } => {
                self.http_complete(endpoint, api_key, agent, request)
            }
        }
    }

    fn http_complete(
        &self,
        endpoint: &str,
        api_key: &str,
        agent: &ureq::Agent,
        request: &ChatRequest,
    ) -> Result<ChatResponse, GatewayError> {
        let mut body = serde_json::json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
        });
        if let Some(max_tokens) = request.max_tokens {
            body["max_tokens"] = max_tokens.into();
        }

        let mut attempt = 0;
        loop {
            match self.try_post(endpoint, api_key, agent, &body) {
                Ok(response) => return Ok(response),
                Err(err) => {
                    let retryable = match &err {
                        GatewayError::Transport(_) | GatewayError::Timeout => true,
                        GatewayError::HttpStatus { status, .. } => {
                            *status == 429 || (500..600).contains(&(*status as i32))
                        }
                        _ => false,
                    };
                    if !retryable || attempt >= self.max_retries {
                        return Err(err);
                    }
                    let backoff = self.backoff_base * 2u32.saturating_pow(attempt);
                    let jitter_ms = fastrand::u64(0..=backoff.as_millis().max(2) as u64 / 2);
                    std::thread::sleep(backoff + Duration::from_millis(jitter_ms));
                    attempt += 1;
                }
            }
        }
    }

    fn try_post(
        &self,
        endpoint: &str,
        api_key: &str,
        agent: &ureq::Agent,
        body: &serde_json::Value,
    ) -> Result<ChatResponse, GatewayError> {
        let result = agent
            .post(endpoint)
            .header("Authorization", &format!("Bearer {api_key}"))
            .send_json(body);
        let mut response = match result {
            Ok(response) => response,
            Err(ureq::Error::Timeout(_)) => return Err(GatewayError::Timeout),
            Err(err) => return Err(GatewayError::Transport(err.to_string())),
        };
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            let excerpt: String = text.chars().take(200).collect();
            return Err(GatewayError::HttpStatus { status, body: excerpt });
        }
        parse_chat_response(&text)
    }
}

fn parse_chat_response(text: &str) -> Result<ChatResponse, GatewayError> {
    #[derive(Deserialize)]
    struct WireMessage {
        content: Option<String>,
    }
    #[derive(Deserialize)]
    struct WireChoice {
        message: WireMessage,
        #[serde(default)]
        finish_reason: Option<String>,
    }
    #[derive(Deserialize)]
    struct WireResponse {
        choices: Vec<WireChoice>,
        #[serde(default)]
        usage: Option<Usage>,
    }

    let wire: WireResponse = serde_json::from_str(text)
        .map_err(|e| GatewayError::MalformedResponse(e.to_string()))?;
    let choice = wire
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| GatewayError::MalformedResponse("empty choices array".to_string()))?;
    let finish_reason = choice.finish_reason.unwrap_or_else(|| "stop".to_string());
    let content = match choice.message.content {
        Some(content) => content,
        None if finish_reason == "stop" => {
            return Err(GatewayError::MalformedResponse(
                "finish_reason is stop but content is missing".to_string(),
            ))
        }
        None => String::new(),
    };
    Ok(ChatResponse { content, finish_reason, usage: wire.usage.unwrap_or_default() })
}

/// Script lookup: an entry matches on exact prompt hash, or on template
/// id when the request is tagged. First matching entry wins.
fn mock_complete(entries: &[MockEntry], request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
    let hash = request.prompt_sha256();
    let template = request.template.map(|t| t.as_str());
    let hit = entries.iter().find(|entry| {
        entry.matcher.prompt_sha256.as_deref() == Some(hash.as_str())
            || (template.is_some() && entry.matcher.template_id.as_deref() == template)
    });
    match hit {
        Some(entry) => Ok(ChatResponse {
            content: entry.response.clone(),
            finish_reason: "stop".to_string(),
            usage: Usage::default(),
        }),
        None => Err(GatewayError::MockMiss {
            hash,
            template: template.unwrap_or("<untagged>").to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(prompt: &str) -> ChatRequest {
        ChatRequest::prompt("test-model", prompt, TemplateId::Review)
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = request("hello").prompt_sha256();
        let b = request("hello").prompt_sha256();
        let c = request("world").prompt_sha256();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn mock_matches_by_hash_before_template() {
        let req = request("specific prompt");
        let gateway = Gateway::mock(vec![
            MockEntry {
                matcher: MockMatch {
                    template_id: None,
                    prompt_sha256: Some(req.prompt_sha256()),
                },
                response: "by hash".to_string(),
            },
            MockEntry {
                matcher: MockMatch { template_id: Some("REVIEW".to_string()), prompt_sha256: None },
                response: "by template".to_string(),
            },
        ]);
        assert_eq!(gateway.complete(&req).unwrap().content, "by hash");
        assert_eq!(gateway.complete(&request("other")).unwrap().content, "by template");
    }

    #[test]
    fn mock_miss_names_the_hash() {
        let gateway = Gateway::mock(vec![]);
        let req = request("unscripted");
        match gateway.complete(&req).unwrap_err() {
            GatewayError::MockMiss { hash, template } => {
                assert_eq!(hash, req.prompt_sha256());
                assert_eq!(template, "REVIEW");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn mock_is_deterministic() {
        let gateway = Gateway::mock(vec![MockEntry {
            matcher: MockMatch { template_id: Some("REVIEW".to_string()), prompt_sha256: None },
            response: "fixed".to_string(),
        }]);
        let req = request("anything");
        let first = gateway.complete(&req).unwrap();
        let second = gateway.complete(&req).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn wire_response_parsing() {
        let ok = parse_chat_response(
            r#"{"choices":[{"message":{"content":"hi"},"finish_reason":"stop"}],"usage":{"prompt_tokens":3,"completion_tokens":1}}"#,
        )
        .unwrap();
        assert_eq!(ok.content, "hi");
        assert_eq!(ok.usage.prompt_tokens, 3);

        assert!(matches!(
            parse_chat_response(r#"{"choices":[]}"#),
            Err(GatewayError::MalformedResponse(_))
        ));
        assert!(matches!(
            parse_chat_response(r#"{"choices":[{"message":{},"finish_reason":"stop"}]}"#),
            Err(GatewayError::MalformedResponse(_))
        ));
    }
}
