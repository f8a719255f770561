use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Retries allowed after a failed transport attempt.
pub const MAX_RETRIES: u32 = 2;

/// Provider description loaded from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Endpoint root; requests go to `<base_url>/chat/completions`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_in_flight")]
    pub in_flight: usize,
    /// Capped at [`MAX_RETRIES`].
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_max_tokens() -> u32 {
    16384
}
fn default_in_flight() -> usize {
    4
}
fn default_retries() -> u32 {
    MAX_RETRIES
}
fn default_timeout_secs() -> u64 {
    600
}

impl ProviderConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// A source of completions for a prompt.
pub trait Provider: Sync {
    /// Recorded as the model name of each candidate.
    fn model_name(&self) -> &str;

    /// Requests one completion; `ordinal` identifies the request within a batch.
    fn complete(&self, ordinal: usize, prompt: &str) -> Result<String, String>;

    /// Upper bound on concurrent requests.
    fn in_flight(&self) -> usize {
        1
    }
}

/// Chat-completions style JSON over HTTP.
pub struct HttpProvider {
    config: ProviderConfig,
    agent: ureq::Agent,
    backoff: Duration,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        HttpProvider {
            config,
            agent,
            backoff: Duration::from_secs(1),
        }
    }

    /// First retry delay; doubled on every further retry.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn attempt(&self, prompt: &str) -> Result<String, String> {
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let body = json!({
            "model": self.config.model,
            "max_tokens": self.config.max_tokens,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut req = self.agent.post(&url);
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| format!("transport: {e}"))?;
        let v: serde_json::Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| format!("transport: {e}"))?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_owned)
            .ok_or_else(|| "transport: response has no choices[0].message.content".into())
    }
}

impl Provider for HttpProvider {
    fn model_name(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, _ordinal: usize, prompt: &str) -> Result<String, String> {
        let retries = self.config.retries.min(MAX_RETRIES);
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(e) if attempt >= retries => return Err(e),
                Err(_) => {
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        }
    }

    fn in_flight(&self) -> usize {
        self.config.in_flight.max(1)
    }
}

/// One canned reply of a [`MockProvider`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockReply {
    Text(String),
    /// A transport failure with this diagnostic.
    Failure(String),
}

/// Replays the files of a directory in name order, cycling when more
/// requests arrive than there are files. `*.fail` files stand for
/// transport failures; every other regular file is a response.
pub struct MockProvider {
    dir: PathBuf,
    replies: Vec<MockReply>,
}

impl MockProvider {
    pub fn from_dir(dir: &Path) -> Result<Self, String> {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| format!("{}: {e}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(format!("{}: no canned responses", dir.display()));
        }
        let replies = files
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                Ok(if p.extension().is_some_and(|e| e == "fail") {
                    MockReply::Failure(format!("transport: {}", text.trim()))
                } else {
                    MockReply::Text(text)
                })
            })
            .collect::<Result<_, String>>()?;
        Ok(MockProvider {
            dir: dir.to_owned(),
            replies,
        })
    }

    pub fn from_replies(replies: Vec<MockReply>) -> Self {
        assert!(!replies.is_empty());
        MockProvider {
            dir: PathBuf::new(),
            replies,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl Provider for MockProvider {
    fn model_name(&self) -> &str {
        "mock"
    }

    fn complete(&self, ordinal: usize, _prompt: &str) -> Result<String, String> {
        match &self.replies[ordinal % self.replies.len()] {
            MockReply::Text(t) => Ok(t.clone()),
            MockReply::Failure(e) => Err(e.clone()),
        }
    }
}

/// A `--provider` argument: `mock:<dir>` or a provider config file.
pub fn provider_from_arg(arg: &str) -> Result<Box<dyn Provider>, String> {
    match arg.strip_prefix("mock:") {
        Some(dir) => Ok(Box::new(MockProvider::from_dir(Path::new(dir))?)),
        None => Ok(Box::new(HttpProvider::new(ProviderConfig::load(
            Path::new(arg),
        )?))),
    }
}

/// One completed request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub ordinal: usize,
    pub result: Result<String, String>,
    /// Milliseconds since the Unix epoch.
    pub requested_at: u128,
    pub received_at: u128,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// `n` independent requests for the same prompt, in ordinal order.
pub fn request_candidates(prompt: &str, provider: &dyn Provider, n: usize) -> Vec<RawResponse> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(provider.in_flight())
        .build()
        .expect("thread pool");
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|ordinal| {
                let requested_at = now_ms();
                let result = provider.complete(ordinal, prompt);
                RawResponse {
                    ordinal,
                    result,
                    requested_at,
                    received_at: now_ms(),
                }
            })
            .collect()
    })
}
