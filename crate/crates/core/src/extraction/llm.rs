//! LLM client boundary: a live chat-completions client plus the
//! record/replay pair that the test suite and offline audits run on.
//!
//! Replay is keyed by the SHA-256 hash of the full prompt, so a stale
//! recording surfaces as a loud [`ExtractionError::ReplayMiss`] naming the
//! hash instead of silently answering a different question.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::prompt::prompt_hash;
use super::ExtractionError;
use crate::embedding::RetryPolicy;

/// Anything that can complete a prompt. Must be callable from multiple
/// threads.
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ExtractionError>;
}

/// Connection settings for a remote chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env_name: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl LlmConfig {
    pub fn new(
        endpoint_url: impl Into<String>,
        model_id: impl Into<String>,
        api_key_env_name: impl Into<String>,
    ) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_id: model_id.into(),
            api_key_env_name: api_key_env_name.into(),
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ExtractionError> {
        let invalid = |detail: String| ExtractionError::InvalidLlmConfig { detail };
        if !self.endpoint_url.starts_with("http://") && !self.endpoint_url.starts_with("https://") {
            return Err(invalid(format!(
                "endpoint_url must be an absolute http(s) URL, got {:?}",
                self.endpoint_url
            )));
        }
        if self.model_id.trim().is_empty() {
            return Err(invalid("model_id must be non-empty".to_string()));
        }
        if self.retry.max_attempts == 0 {
            return Err(invalid("retry.max_attempts must be >= 1".to_string()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: String,
}

/// Blocking chat-completions client. Sends temperature 0 — extraction is
/// meant to be as repeatable as the endpoint allows.
pub struct HttpLlmClient {
    config: LlmConfig,
    client: reqwest::blocking::Client,
}

impl HttpLlmClient {
    pub fn new(config: LlmConfig) -> Result<Self, ExtractionError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ExtractionError::InvalidLlmConfig {
                detail: format!("failed to build HTTP client: {e}"),
            })?;
        Ok(Self { config, client })
    }

    fn api_key(&self) -> Result<String, ExtractionError> {
        std::env::var(&self.config.api_key_env_name).map_err(|_| {
            ExtractionError::MissingApiKey {
                env_name: self.config.api_key_env_name.clone(),
            }
        })
    }
}

impl LlmClient for HttpLlmClient {
    fn complete(&self, prompt: &str) -> Result<String, ExtractionError> {
        let api_key = self.api_key()?;
        let url = format!(
            "{}/chat/completions",
            self.config.endpoint_url.trim_end_matches('/')
        );
        let body = WireRequest {
            model: &self.config.model_id,
            messages: vec![WireMessage {
                role: "user",
                content: prompt,
            }],
            temperature: 0.0,
        };

        let mut last_failure = String::new();
        for attempt in 1..=self.config.retry.max_attempts {
            if attempt > 1 {
                let backoff = self.config.retry.initial_backoff * (1 << (attempt - 2)) as u32;
                std::thread::sleep(backoff);
            }
            let response = match self
                .client
                .post(&url)
                .bearer_auth(&api_key)
                .json(&body)
                .send()
            {
                Ok(response) => response,
                Err(e) => {
                    last_failure = format!("transport error: {e}");
                    continue;
                }
            };
            let status = response.status();
            if status.is_success() {
                let wire: WireResponse =
                    response
                        .json()
                        .map_err(|e| ExtractionError::MalformedLlmResponse {
                            detail: e.to_string(),
                        })?;
                return wire
                    .choices
                    .into_iter()
                    .next()
                    .map(|c| c.message.content)
                    .ok_or_else(|| ExtractionError::MalformedLlmResponse {
                        detail: "response has no choices".to_string(),
                    });
            }
            let message = format!("HTTP {status}");
            let retriable = status.as_u16() == 429 || status.is_server_error();
            if !retriable {
                return Err(ExtractionError::LlmUnavailable {
                    attempts: attempt,
                    message,
                });
            }
            last_failure = message;
        }
        Err(ExtractionError::LlmUnavailable {
            attempts: self.config.retry.max_attempts,
            message: last_failure,
        })
    }
}

/// Serves recorded responses from a directory of files named by prompt
/// hash. Never touches the network.
pub struct ReplayClient {
    store: PathBuf,
}

impl ReplayClient {
    pub fn new(store: impl Into<PathBuf>) -> Self {
        Self {
            store: store.into(),
        }
    }

    fn response_path(&self, hash: &str) -> PathBuf {
        self.store.join(format!("{hash}.txt"))
    }
}

impl LlmClient for ReplayClient {
    fn complete(&self, prompt: &str) -> Result<String, ExtractionError> {
        let hash = prompt_hash(prompt);
        let path = self.response_path(&hash);
        std::fs::read_to_string(&path).map_err(|_| ExtractionError::ReplayMiss {
            prompt_hash: hash,
            store: self.store.display().to_string(),
        })
    }
}

/// Wraps another client and records every (prompt hash → response) pair
/// into a replay store as it passes through.
pub struct RecordingClient<C> {
    inner: C,
    store: PathBuf,
}

impl<C: LlmClient> RecordingClient<C> {
    pub fn new(inner: C, store: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            store: store.into(),
        }
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn complete(&self, prompt: &str) -> Result<String, ExtractionError> {
        let response = self.inner.complete(prompt)?;
        let record_io = |source: std::io::Error| ExtractionError::RecordIo {
            path: self.store.display().to_string(),
            source,
        };
        std::fs::create_dir_all(&self.store).map_err(record_io)?;
        let path = self.store.join(format!("{}.txt", prompt_hash(prompt)));
        std::fs::write(&path, &response).map_err(record_io)?;
        Ok(response)
    }
}

/// Records into a store that [`ReplayClient`] can later serve from — the
/// standard way to pin fixtures for offline runs.
pub fn record_store_path(store: &Path, prompt: &str) -> PathBuf {
    store.join(format!("{}.txt", prompt_hash(prompt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::{mpsc, Arc};

    struct FixedClient {
        response: String,
        calls: Arc<AtomicUsize>,
    }

    impl LlmClient for FixedClient {
        fn complete(&self, _prompt: &str) -> Result<String, ExtractionError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.response.clone())
        }
    }

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let calls = Arc::new(AtomicUsize::new(0));
        let recorder = RecordingClient::new(
            FixedClient {
                response: "the canned answer".to_string(),
                calls: calls.clone(),
            },
            dir.path(),
        );
        let recorded = recorder.complete("what is the answer?").unwrap();
        assert_eq!(recorded, "the canned answer");
        assert_eq!(calls.load(Ordering::SeqCst), 1);

        let replay = ReplayClient::new(dir.path());
        let replayed = replay.complete("what is the answer?").unwrap();
        assert_eq!(replayed, "the canned answer");
        // recording file is named by the prompt hash
        assert!(record_store_path(dir.path(), "what is the answer?").exists());
    }

    #[test]
    fn replay_miss_names_the_prompt_hash() {
        let dir = tempfile::tempdir().unwrap();
        let replay = ReplayClient::new(dir.path());
        let err = replay.complete("never recorded").unwrap_err();
        match err {
            ExtractionError::ReplayMiss { prompt_hash, store } => {
                assert_eq!(prompt_hash, super::prompt_hash("never recorded"));
                assert_eq!(store, dir.path().display().to_string());
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn replay_distinguishes_prompts() {
        let dir = tempfile::tempdir().unwrap();
        let calls = Arc::new(AtomicUsize::new(0));
        let recorder = RecordingClient::new(
            FixedClient {
                response: "A".to_string(),
                calls,
            },
            dir.path(),
        );
        recorder.complete("prompt one").unwrap();
        let replay = ReplayClient::new(dir.path());
        assert!(replay.complete("prompt one").is_ok());
        assert!(replay.complete("prompt two").is_err());
    }

    /// Minimal scripted HTTP server for wire-format assertions.
    fn spawn_server(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<(String, String)>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let mut auth = String::new();
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let line = line.trim_end().to_string();
                    if line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization:") {
                        auth = line["authorization:".len()..].trim().to_string();
                    }
                }
                let mut body_bytes = vec![0u8; content_length];
                reader.read_exact(&mut body_bytes).unwrap();
                tx.send((auth, String::from_utf8(body_bytes).unwrap()))
                    .unwrap();
                let response = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                let mut stream = reader.into_inner();
                stream.write_all(response.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}"), rx)
    }

    fn test_config(endpoint: &str, key_var: &str) -> LlmConfig {
        let mut config = LlmConfig::new(endpoint, "chat-model", key_var);
        config.retry.initial_backoff = Duration::from_millis(5);
        config
    }

    #[test]
    fn chat_wire_format_is_correct() {
        let body = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "extracted!"}}]
        })
        .to_string();
        let (endpoint, rx) = spawn_server(vec![(200, body)]);
        std::env::set_var("CHAT_WIRE_TEST_KEY", "chat-secret");
        let client = HttpLlmClient::new(test_config(&endpoint, "CHAT_WIRE_TEST_KEY")).unwrap();
        let out = client.complete("the prompt").unwrap();
        assert_eq!(out, "extracted!");

        let (auth, request_body) = rx.recv().unwrap();
        assert_eq!(auth, "Bearer chat-secret");
        let parsed: serde_json::Value = serde_json::from_str(&request_body).unwrap();
        assert_eq!(
            parsed,
            serde_json::json!({
                "model": "chat-model",
                "messages": [{"role": "user", "content": "the prompt"}],
                "temperature": 0.0
            })
        );
    }

    #[test]
    fn chat_client_retries_server_errors() {
        let ok = serde_json::json!({"choices": [{"message": {"content": "late"}}]}).to_string();
        let (endpoint, rx) = spawn_server(vec![(500, "{}".to_string()), (200, ok)]);
        std::env::set_var("CHAT_RETRY_TEST_KEY", "k");
        let client = HttpLlmClient::new(test_config(&endpoint, "CHAT_RETRY_TEST_KEY")).unwrap();
        assert_eq!(client.complete("p").unwrap(), "late");
        assert_eq!(rx.iter().count(), 2);
    }

    #[test]
    fn chat_malformed_response_is_reported() {
        let (endpoint, _rx) = spawn_server(vec![(200, r#"{"choices": []}"#.to_string())]);
        std::env::set_var("CHAT_MALFORMED_TEST_KEY", "k");
        let client = HttpLlmClient::new(test_config(&endpoint, "CHAT_MALFORMED_TEST_KEY")).unwrap();
        let err = client.complete("p").unwrap_err();
        assert!(matches!(err, ExtractionError::MalformedLlmResponse { .. }));
    }

    #[test]
    fn chat_missing_api_key_is_reported() {
        let client = HttpLlmClient::new(test_config(
            "http://127.0.0.1:9",
            "UNSET_CHAT_KEY_VAR_FOR_TEST",
        ))
        .unwrap();
        let err = client.complete("p").unwrap_err();
        assert!(matches!(err, ExtractionError::MissingApiKey { .. }));
    }
}
