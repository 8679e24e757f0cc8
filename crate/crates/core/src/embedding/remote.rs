//! HTTP embedding provider.
//!
//! Speaks the de-facto embeddings wire format: POST {"model", "input": [..]}
//! to `<endpoint>/embeddings`, bearer-token auth, response
//! {"data": [{"embedding": [..]}, ..]}. The API key comes from an
//! environment variable named in the config — never from the config file
//! itself, so configs stay safe to echo into reports.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingProvider};
use crate::stats::EmbeddingVector;

/// Retry behavior for transient failures: transport errors and HTTP
/// 429/5xx. Other statuses fail immediately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: usize,
    /// Backoff before the second attempt; doubles each further attempt.
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

/// Connection settings for a remote embeddings endpoint.
#[derive(Debug, Clone)]
pub struct ProviderConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env_name: String,
    pub timeout: Duration,
    pub max_parallel_requests: usize,
    pub retry: RetryPolicy,
}

impl ProviderConfig {
    pub fn new(
        endpoint_url: impl Into<String>,
        model_id: impl Into<String>,
        api_key_env_name: impl Into<String>,
    ) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_id: model_id.into(),
            api_key_env_name: api_key_env_name.into(),
            timeout: Duration::from_secs(30),
            max_parallel_requests: 4,
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let invalid = |message: String| EmbeddingError::InvalidConfig { message };
        if !self.endpoint_url.starts_with("http://") && !self.endpoint_url.starts_with("https://") {
            return Err(invalid(format!(
                "endpoint_url must be an absolute http(s) URL, got {:?}",
                self.endpoint_url
            )));
        }
        if self.model_id.trim().is_empty() {
            return Err(invalid("model_id must be non-empty".to_string()));
        }
        if self.max_parallel_requests == 0 {
            return Err(invalid("max_parallel_requests must be >= 1".to_string()));
        }
        if self.retry.max_attempts == 0 {
            return Err(invalid("retry.max_attempts must be >= 1".to_string()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct WireResponse {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f64>,
}

/// Blocking HTTP client for an embeddings endpoint. Requests are issued
/// one at a time per call; the type itself is safe to share across
/// threads, which bounds concurrency at the number of calling threads.
pub struct HttpEmbeddingProvider {
    config: ProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpEmbeddingProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, EmbeddingError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| EmbeddingError::InvalidConfig {
                message: format!("failed to build HTTP client: {e}"),
            })?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn api_key(&self) -> Result<String, EmbeddingError> {
        std::env::var(&self.config.api_key_env_name).map_err(|_| EmbeddingError::MissingApiKey {
            env_name: self.config.api_key_env_name.clone(),
        })
    }

    fn endpoint(&self) -> String {
        format!(
            "{}/embeddings",
            self.config.endpoint_url.trim_end_matches('/')
        )
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, inputs: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        let api_key = self.api_key()?;
        let url = self.endpoint();
        let body = WireRequest {
            model: &self.config.model_id,
            input: inputs,
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
                return parse_vectors(response, inputs.len());
            }
            let message = format!("HTTP {status}");
            let retriable = status.as_u16() == 429 || status.is_server_error();
            if !retriable {
                return Err(EmbeddingError::ProviderUnavailable {
                    attempts: attempt,
                    message,
                });
            }
            last_failure = message;
        }

        Err(EmbeddingError::ProviderUnavailable {
            attempts: self.config.retry.max_attempts,
            message: last_failure,
        })
    }
}

fn parse_vectors(
    response: reqwest::blocking::Response,
    expected: usize,
) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
    let wire: WireResponse =
        response
            .json()
            .map_err(|e| EmbeddingError::MalformedProviderResponse {
                message: e.to_string(),
            })?;
    if wire.data.len() != expected {
        return Err(EmbeddingError::MalformedProviderResponse {
            message: format!(
                "response has {} embeddings for {} inputs",
                wire.data.len(),
                expected
            ),
        });
    }
    wire.data
        .into_iter()
        .map(|e| EmbeddingVector::new(e.embedding).map_err(EmbeddingError::from))
        .collect()
}
