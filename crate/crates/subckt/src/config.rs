use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use subckt_core::pipeline::{Provider, DEFAULT_RETRY_LIMIT};

use crate::provider::{scripted_from_file, HttpProvider};
use crate::sandbox::{DEFAULT_INTERPRETER, DEFAULT_TIMEOUT};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("provider kind '{0}' needs '{1}'")]
    MissingField(String, &'static str),
    #[error("provider: {0}")]
    Provider(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PipelineFile {
    #[serde(default = "default_retry_limit")]
    pub retry_limit: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_interpreter")]
    pub interpreter: String,
    /// Directory of `<id>.sp` netlists with `<id>.hl1|hl2|hl3` labels; the
    /// bundled demonstrations when absent.
    pub demos: Option<PathBuf>,
    pub provider: ProviderConfig,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Openai,
    Scripted,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub url: Option<String>,
    pub model: Option<String>,
    pub credential_env: Option<String>,
    /// JSON array of replies for the scripted provider.
    pub replies: Option<PathBuf>,
    #[serde(default = "default_request_timeout")]
    pub request_timeout_secs: u64,
}

fn default_retry_limit() -> usize {
    DEFAULT_RETRY_LIMIT
}
fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT.as_secs()
}
fn default_interpreter() -> String {
    DEFAULT_INTERPRETER.to_string()
}
fn default_request_timeout() -> u64 {
    120
}

impl PipelineFile {
    /// Relative paths inside the file resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg: PipelineFile =
            toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(d) = &cfg.demos {
            cfg.demos = Some(base.join(d));
        }
        if let Some(r) = &cfg.provider.replies {
            cfg.provider.replies = Some(base.join(r));
        }
        Ok(cfg)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

impl ProviderConfig {
    pub fn build(&self) -> Result<Box<dyn Provider>, ConfigError> {
        match self.kind {
            ProviderKind::Scripted => {
                let path = self.replies.as_ref().ok_or(ConfigError::MissingField("scripted".into(), "replies"))?;
                let p = scripted_from_file(path).map_err(|e| ConfigError::Provider(e.message))?;
                Ok(Box::new(p))
            }
            ProviderKind::Openai => {
                let url = self.url.as_deref().ok_or(ConfigError::MissingField("openai".into(), "url"))?;
                let model = self.model.as_deref().ok_or(ConfigError::MissingField("openai".into(), "model"))?;
                let p = HttpProvider::new(
                    url,
                    model,
                    self.credential_env.as_deref(),
                    Duration::from_secs(self.request_timeout_secs),
                )
                .map_err(|e| ConfigError::Provider(e.message))?;
                Ok(Box::new(p))
            }
        }
    }
}
