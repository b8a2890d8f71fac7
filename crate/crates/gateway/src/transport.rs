use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn new(role: &str, content: &str) -> Self {
        Message {
            role: role.to_owned(),
            content: content.to_owned(),
        }
    }
}

/// Chat-completion request body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint answered HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    Malformed(String),
    #[error("no recorded exchange for request digest {0}")]
    NoFixture(String),
    #[error("fixture i/o: {0}")]
    Fixture(String),
}

impl TransportError {
    /// Worth retrying: the same request may succeed later.
    pub fn is_transient(&self) -> bool {
        match self {
            TransportError::Unreachable(_) => true,
            TransportError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &CompletionRequest) -> Result<String, TransportError>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        (**self).send(request)
    }
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn send(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        (**self).send(request)
    }
}

/// Hex SHA-256 of the compact JSON encoding of the messages. Model settings
/// are not part of the key.
pub fn digest(messages: &[Message]) -> String {
    let bytes = serde_json::to_vec(messages).expect("messages serialize");
    hex::encode(Sha256::digest(bytes))
}

/// OpenAI-style `POST {base}/chat/completions`.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    url: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(
        endpoint: &str,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        let base = endpoint.trim_end_matches('/');
        let url = if base.ends_with("/chat/completions") {
            base.to_owned()
        } else {
            format!("{base}/chat/completions")
        };
        Ok(HttpTransport {
            client,
            url,
            api_key,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

impl Transport for HttpTransport {
    fn send(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        let mut req = self.client.post(&self.url).json(request);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        let status = resp.status();
        let body = resp
            .text()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError::Status {
                status: status.as_u16(),
                body,
            });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&body).map_err(|e| TransportError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportError::Malformed("response has no choices".into()))
    }
}

/// One recorded exchange, stored as `<digest>.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub digest: String,
    pub messages: Vec<Message>,
    pub response: String,
}

impl Fixture {
    pub fn new(messages: Vec<Message>, response: String) -> Self {
        Fixture {
            digest: digest(&messages),
            messages,
            response,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fixture serializes");
        s.push('\n');
        s
    }

    pub fn file_name(&self) -> String {
        format!("{}.json", self.digest)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, TransportError> {
        fs::create_dir_all(dir).map_err(|e| TransportError::Fixture(e.to_string()))?;
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_json()).map_err(|e| TransportError::Fixture(e.to_string()))?;
        Ok(path)
    }
}

/// Serves recorded responses by request digest.
#[derive(Debug, Clone, Default)]
pub struct ReplayTransport {
    fixtures: HashMap<String, String>,
}

impl ReplayTransport {
    pub fn new(fixtures: impl IntoIterator<Item = Fixture>) -> Self {
        ReplayTransport {
            fixtures: fixtures
                .into_iter()
                .map(|f| (f.digest, f.response))
                .collect(),
        }
    }

    /// Loads every `*.json` fixture in `dir`. The stored digest must match
    /// the stored messages.
    pub fn from_dir(dir: &Path) -> Result<Self, TransportError> {
        let mut fixtures = Vec::new();
        let entries = fs::read_dir(dir)
            .map_err(|e| TransportError::Fixture(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths
            .into_iter()
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
        {
            let text = fs::read_to_string(&path)
                .map_err(|e| TransportError::Fixture(format!("{}: {e}", path.display())))?;
            let f: Fixture = serde_json::from_str(&text)
                .map_err(|e| TransportError::Fixture(format!("{}: {e}", path.display())))?;
            if digest(&f.messages) != f.digest {
                return Err(TransportError::Fixture(format!(
                    "{}: digest does not match messages",
                    path.display()
                )));
            }
            fixtures.push(f);
        }
        Ok(Self::new(fixtures))
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl Transport for ReplayTransport {
    fn send(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        let key = digest(&request.messages);
        self.fixtures
            .get(&key)
            .cloned()
            .ok_or(TransportError::NoFixture(key))
    }
}

/// Forwards to `inner` and writes each successful exchange to `dir`.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        RecordingTransport {
            inner,
            dir: dir.into(),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, request: &CompletionRequest) -> Result<String, TransportError> {
        let response = self.inner.send(request)?;
        Fixture::new(request.messages.clone(), response.clone()).write(&self.dir)?;
        Ok(response)
    }
}
