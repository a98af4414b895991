//! Chat-completion providers: an OpenAI-compatible HTTP endpoint and a
//! replay of canned replies from a file.

use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value};
use subckt_core::pipeline::{Message, Provider, ProviderError, ScriptedProvider, Speaker};

pub struct HttpProvider {
    agent: ureq::Agent,
    url: String,
    model: String,
    credential: Option<String>,
}

impl HttpProvider {
    /// `credential_env` names the environment variable holding the bearer
    /// token; it is read once here.
    pub fn new(url: &str, model: &str, credential_env: Option<&str>, timeout: Duration) -> Result<Self, ProviderError> {
        let credential = match credential_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| ProviderError::new(format!("credential variable {var} is not set")))?,
            ),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(HttpProvider { agent, url: url.to_string(), model: model.to_string(), credential })
    }
}

fn role(s: Speaker) -> &'static str {
    match s {
        Speaker::System => "system",
        Speaker::User => "user",
        Speaker::Assistant => "assistant",
    }
}

impl Provider for HttpProvider {
    fn complete(&mut self, conversation: &[Message]) -> Result<String, ProviderError> {
        let messages: Vec<Value> = conversation
            .iter()
            .map(|m| json!({"role": role(m.role), "content": m.content}))
            .collect();
        let body = json!({"model": self.model, "messages": messages});
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(token) = &self.credential {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| ProviderError::new(format!("{}: {e}", self.url)))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::new(format!("reading response: {e}")))?;
        if !status.is_success() {
            return Err(ProviderError::new(format!("{}: HTTP {status}: {}", self.url, text.trim())));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| ProviderError::new(format!("response is not JSON: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ProviderError::new("response has no choices[0].message.content"))
    }
}

/// Loads a JSON array of reply strings.
pub fn scripted_from_file(path: &Path) -> Result<ScriptedProvider, ProviderError> {
    let text = std::fs::read_to_string(path).map_err(|e| ProviderError::new(format!("{}: {e}", path.display())))?;
    let replies: Vec<String> =
        serde_json::from_str(&text).map_err(|e| ProviderError::new(format!("{}: {e}", path.display())))?;
    Ok(ScriptedProvider::new(replies))
}
