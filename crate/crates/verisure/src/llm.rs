//! Chat-model backends: a scripted replay for hermetic runs and an HTTP
//! client for chat-completions compatible services.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use verisure_core::agents::{ChatMessage, ChatRole};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.0,
            max_tokens: 4096,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("scripted backend has no responses left")]
    Exhausted,
    #[error("model backend misconfigured: {0}")]
    Config(String),
    #[error("model request failed: {0}")]
    Transport(String),
    #[error("model response unreadable: {0}")]
    Protocol(String),
}

/// Shared across sessions, so implementations must tolerate concurrent
/// calls.
pub trait ModelBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, messages: &[ChatMessage], params: &SamplingParams) -> Result<String, LlmError>;
}

/// Replays canned responses in order and records every prompt.
#[derive(Debug, Default)]
pub struct Scripted {
    responses: Mutex<VecDeque<String>>,
    prompts: Mutex<Vec<Vec<ChatMessage>>>,
}

impl Scripted {
    pub fn new<I: IntoIterator<Item = String>>(responses: I) -> Self {
        Scripted {
            responses: Mutex::new(responses.into_iter().collect()),
            prompts: Mutex::default(),
        }
    }

    /// Every `*.txt` file of `dir`, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self, LlmError> {
        let entries = std::fs::read_dir(dir)
            .map_err(|e| LlmError::Config(format!("{}: {e}", dir.display())))?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(LlmError::Config(format!("{}: no response fixtures", dir.display())));
        }
        let mut out = Vec::with_capacity(files.len());
        for f in files {
            out.push(
                std::fs::read_to_string(&f)
                    .map_err(|e| LlmError::Config(format!("{}: {e}", f.display())))?,
            );
        }
        Ok(Scripted::new(out))
    }

    /// Prompts seen so far, oldest first.
    pub fn prompts(&self) -> Vec<Vec<ChatMessage>> {
        self.prompts.lock().unwrap().clone()
    }

    pub fn remaining(&self) -> usize {
        self.responses.lock().unwrap().len()
    }
}

impl ModelBackend for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, messages: &[ChatMessage], _: &SamplingParams) -> Result<String, LlmError> {
        self.prompts.lock().unwrap().push(messages.to_vec());
        self.responses.lock().unwrap().pop_front().ok_or(LlmError::Exhausted)
    }
}

/// Chat-completions over HTTP(S).
pub struct Http {
    base_url: String,
    api_key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl Http {
    pub fn new(base_url: &str, api_key: Option<String>, model: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Http {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
            model: model.to_string(),
            agent,
        }
    }

    /// From `VERISURE_LLM_BASE_URL`, `VERISURE_LLM_API_KEY` and
    /// `VERISURE_LLM_MODEL`.
    pub fn from_env() -> Result<Self, LlmError> {
        let base = std::env::var("VERISURE_LLM_BASE_URL")
            .map_err(|_| LlmError::Config("VERISURE_LLM_BASE_URL is not set".into()))?;
        let model = std::env::var("VERISURE_LLM_MODEL")
            .map_err(|_| LlmError::Config("VERISURE_LLM_MODEL is not set".into()))?;
        let key = std::env::var("VERISURE_LLM_API_KEY").ok();
        Ok(Http::new(&base, key, &model, Duration::from_secs(300)))
    }
}

fn role_name(r: ChatRole) -> &'static str {
    match r {
        ChatRole::System => "system",
        ChatRole::User => "user",
        ChatRole::Assistant => "assistant",
    }
}

/// Request body in the chat-completions shape.
pub fn request_body(model: &str, messages: &[ChatMessage], params: &SamplingParams) -> Value {
    let msgs: Vec<Value> = messages
        .iter()
        .map(|m| json!({"role": role_name(m.role), "content": m.content}))
        .collect();
    json!({
        "model": model,
        "messages": msgs,
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
    })
}

/// `choices[0].message.content` of a response body.
pub fn response_text(body: &Value) -> Result<String, LlmError> {
    if let Some(e) = body.get("error") {
        return Err(LlmError::Protocol(format!("service error: {e}")));
    }
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LlmError::Protocol("no choices[0].message.content".into()))
}

impl ModelBackend for Http {
    fn name(&self) -> &str {
        &self.model
    }

    fn complete(&self, messages: &[ChatMessage], params: &SamplingParams) -> Result<String, LlmError> {
        let url = format!("{}/chat/completions", self.base_url);
        let mut req = self.agent.post(&url).header("Content-Type", "application/json");
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req
            .send_json(request_body(&self.model, messages, params))
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let body: Value = serde_json::from_str(&text)
            .map_err(|e| LlmError::Protocol(format!("HTTP {status}: {e}")))?;
        if !status.is_success() {
            return Err(LlmError::Transport(format!("HTTP {status}: {text}")));
        }
        response_text(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_replays_then_exhausts() {
        let b = Scripted::new(["one".to_string(), "two".to_string()]);
        let p = SamplingParams::default();
        assert_eq!(b.complete(&[ChatMessage::user("a")], &p).unwrap(), "one");
        assert_eq!(b.complete(&[ChatMessage::user("b")], &p).unwrap(), "two");
        assert!(matches!(b.complete(&[], &p), Err(LlmError::Exhausted)));
        assert_eq!(b.prompts().len(), 3);
        assert_eq!(b.prompts()[1][0].content, "b");
    }

    #[test]
    fn wire_format() {
        let body = request_body("m", &[ChatMessage::system("s"), ChatMessage::user("u")], &SamplingParams::default());
        assert_eq!(body["messages"][1]["role"], "user");
        assert_eq!(body["temperature"], 0.0);
        let resp = json!({"choices": [{"message": {"role": "assistant", "content": "hi"}}]});
        assert_eq!(response_text(&resp).unwrap(), "hi");
        assert!(response_text(&json!({"choices": []})).is_err());
    }
}
