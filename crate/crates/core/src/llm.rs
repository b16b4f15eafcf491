//! LLM providers. Tests and offline runs use [`ReplayProvider`], which answers from a
//! fixture file keyed by the SHA-256 of the exact prompt text, so any drift in the prompt
//! shows up as a missing fixture rather than a stale answer.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub trait LlmProvider: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

impl<P: LlmProvider + ?Sized> LlmProvider for &P {
    fn complete(&self, prompt: &str) -> Result<String> {
        (**self).complete(prompt)
    }
}

impl<P: LlmProvider + ?Sized> LlmProvider for Box<P> {
    fn complete(&self, prompt: &str) -> Result<String> {
        (**self).complete(prompt)
    }
}

impl<P: LlmProvider + ?Sized> LlmProvider for std::sync::Arc<P> {
    fn complete(&self, prompt: &str) -> Result<String> {
        (**self).complete(prompt)
    }
}

/// Hex SHA-256 of the prompt bytes.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Fixture map: prompt hash → response text.
pub type Fixtures = BTreeMap<String, String>;

#[derive(Debug, Clone, Default)]
pub struct ReplayProvider {
    fixtures: Fixtures,
}

impl ReplayProvider {
    pub fn new(fixtures: Fixtures) -> Self {
        ReplayProvider { fixtures }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(ReplayProvider {
            fixtures: serde_json::from_str(&raw)?,
        })
    }

    pub fn fixtures(&self) -> &Fixtures {
        &self.fixtures
    }
}

impl LlmProvider for ReplayProvider {
    fn complete(&self, prompt: &str) -> Result<String> {
        let h = prompt_hash(prompt);
        self.fixtures
            .get(&h)
            .cloned()
            .ok_or_else(|| Error::Provider(format!("no replay fixture for prompt {h}:\n{prompt}")))
    }
}

/// Wraps another provider and remembers every exchange so it can be written out as a
/// fixture file.
pub struct RecordingProvider<P> {
    inner: P,
    recorded: Mutex<Fixtures>,
}

impl<P: LlmProvider> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        RecordingProvider {
            inner,
            recorded: Mutex::new(Fixtures::new()),
        }
    }

    pub fn recorded(&self) -> Fixtures {
        self.recorded
            .lock()
            .expect("recording lock poisoned")
            .clone()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_string_pretty(&self.recorded())?;
        json.push('\n');
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

impl<P: LlmProvider> LlmProvider for RecordingProvider<P> {
    fn complete(&self, prompt: &str) -> Result<String> {
        let out = self.inner.complete(prompt)?;
        self.recorded
            .lock()
            .expect("recording lock poisoned")
            .insert(prompt_hash(prompt), out.clone());
        Ok(out)
    }
}

/// Adapts a closure; handy for scripted providers.
pub struct FnProvider<F>(pub F);

impl<F> LlmProvider for FnProvider<F>
where
    F: Fn(&str) -> Result<String> + Send + Sync,
{
    fn complete(&self, prompt: &str) -> Result<String> {
        (self.0)(prompt)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    #[default]
    ReplayFixture,
    LiveHttp,
}

/// Environment variable holding the chat-completion endpoint URL.
pub const ENDPOINT_ENV: &str = "BQR_LLM_ENDPOINT";
/// Environment variable holding the bearer token for the endpoint.
pub const KEY_ENV: &str = "BQR_LLM_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderSettings {
    pub kind: ProviderKind,
    pub fixtures: Option<PathBuf>,
    /// Overrides `BQR_LLM_ENDPOINT` when set.
    pub endpoint: Option<String>,
    pub model: String,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            kind: ProviderKind::ReplayFixture,
            fixtures: None,
            endpoint: None,
            model: "gpt-4o-mini".into(),
            timeout_secs: 60,
            max_in_flight: 4,
        }
    }
}

/// Counting semaphore bounding concurrent calls.
#[derive(Debug)]
pub struct InFlightCap {
    limit: usize,
    used: Mutex<usize>,
    freed: std::sync::Condvar,
}

impl InFlightCap {
    pub fn new(limit: usize) -> Self {
        InFlightCap {
            limit: limit.max(1),
            used: Mutex::new(0),
            freed: std::sync::Condvar::new(),
        }
    }

    pub fn acquire(&self) -> InFlightGuard<'_> {
        let mut used = self.used.lock().expect("in-flight lock poisoned");
        while *used >= self.limit {
            used = self.freed.wait(used).expect("in-flight lock poisoned");
        }
        *used += 1;
        InFlightGuard { cap: self }
    }

    pub fn in_use(&self) -> usize {
        *self.used.lock().expect("in-flight lock poisoned")
    }
}

pub struct InFlightGuard<'a> {
    cap: &'a InFlightCap,
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.cap.used.lock().expect("in-flight lock poisoned");
        *used -= 1;
        self.cap.freed.notify_one();
    }
}

/// Request body for an OpenAI-compatible chat-completion endpoint.
pub fn chat_request_body(model: &str, prompt: &str) -> serde_json::Value {
    serde_json::json!({
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": 0.0,
    })
}

/// Extracts `choices[0].message.content` from a chat-completion response.
pub fn chat_response_text(body: &serde_json::Value) -> Result<String> {
    body.pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Provider(format!("unexpected chat response shape: {body}")))
}

#[cfg(feature = "live")]
pub use live::LiveHttpProvider;

#[cfg(feature = "live")]
mod live {
    use std::time::Duration;

    use super::*;

    pub struct LiveHttpProvider {
        agent: ureq::Agent,
        endpoint: String,
        model: String,
        api_key: Option<String>,
        cap: InFlightCap,
    }

    impl LiveHttpProvider {
        pub fn new(
            endpoint: impl Into<String>,
            model: impl Into<String>,
            api_key: Option<String>,
            timeout: Duration,
            max_in_flight: usize,
        ) -> Self {
            let agent: ureq::Agent = ureq::Agent::config_builder()
                .timeout_global(Some(timeout))
                .build()
                .into();
            LiveHttpProvider {
                agent,
                endpoint: endpoint.into(),
                model: model.into(),
                api_key,
                cap: InFlightCap::new(max_in_flight),
            }
        }

        /// Reads endpoint and key from the environment; `settings.endpoint` wins if set.
        pub fn from_settings(settings: &ProviderSettings) -> Result<Self> {
            let endpoint = settings
                .endpoint
                .clone()
                .or_else(|| std::env::var(ENDPOINT_ENV).ok())
                .ok_or_else(|| Error::Provider(format!("{ENDPOINT_ENV} is not set")))?;
            Ok(Self::new(
                endpoint,
                settings.model.clone(),
                std::env::var(KEY_ENV).ok(),
                Duration::from_secs(settings.timeout_secs),
                settings.max_in_flight,
            ))
        }
    }

    impl LlmProvider for LiveHttpProvider {
        fn complete(&self, prompt: &str) -> Result<String> {
            let _slot = self.cap.acquire();
            let mut req = self.agent.post(&self.endpoint);
            if let Some(key) = &self.api_key {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
            let mut resp = req
                .send_json(chat_request_body(&self.model, prompt))
                .map_err(|e| Error::Provider(format!("POST {}: {e}", self.endpoint)))?;
            let body: serde_json::Value = resp
                .body_mut()
                .read_json()
                .map_err(|e| Error::Provider(format!("reading response: {e}")))?;
            chat_response_text(&body)
        }
    }
}
