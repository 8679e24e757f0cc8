//! Embedding providers and the caching service in front of them.
//!
//! A provider turns text payloads into [`EmbeddingVector`]s. Two providers
//! ship here: an HTTP client for remote embeddings endpoints and a
//! deterministic local provider for offline runs and tests. The
//! [`EmbeddingService`] wraps a provider with an optional on-disk cache,
//! an in-process memo, and dimension-stability checking.
//!
//! Contextualization: generic embeddings endpoints return one vector per
//! payload, so a word-in-context is represented by embedding the context
//! window around its occurrence; a word with no occurrence is embedded as
//! the bare phrase.

mod cache;
mod local;
mod remote;

pub use cache::DiskCache;
pub use local::{deterministic_local_embed, LocalProvider};
pub use remote::{HttpEmbeddingProvider, ProviderConfig, RetryPolicy};

use std::collections::{HashMap, HashSet};
use std::sync::RwLock;

use sha2::{Digest, Sha256};

use crate::corpus::normalize_text;
use crate::stats::{EmbeddingVector, StatsError};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding request has empty text")]
    EmptyText,
    #[error("context does not contain the requested text {text:?} under normalization")]
    ContextMismatch { text: String },
    #[error("invalid provider config: {message}")]
    InvalidConfig { message: String },
    #[error("API key environment variable {env_name} is not set")]
    MissingApiKey { env_name: String },
    #[error("embedding provider unavailable after {attempts} attempt(s): {message}")]
    ProviderUnavailable { attempts: usize, message: String },
    #[error("malformed provider response: {message}")]
    MalformedProviderResponse { message: String },
    #[error("embedding dimension drift for model {model_id}: expected {expected}, got {got}")]
    DimensionDrift {
        model_id: String,
        expected: usize,
        got: usize,
    },
    #[error("embedding cache error at {path}: {source}")]
    CacheIo {
        path: String,
        source: std::io::Error,
    },
    #[error("provider returned an invalid vector: {0}")]
    InvalidVector(#[from] StatsError),
}

/// One embedding request: a word, the optional context passage it occurs
/// in, and the model that should embed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingRequest {
    text: String,
    context: Option<String>,
    model_id: String,
}

impl EmbeddingRequest {
    /// Validates that the text is non-empty and, when a context is given,
    /// that it actually contains the text (case- and
    /// whitespace-insensitively, matching occurrence search).
    pub fn new(
        text: impl Into<String>,
        context: Option<String>,
        model_id: impl Into<String>,
    ) -> Result<Self, EmbeddingError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(EmbeddingError::EmptyText);
        }
        if let Some(context) = &context {
            if !normalize_text(context).contains(&normalize_text(&text)) {
                return Err(EmbeddingError::ContextMismatch { text });
            }
        }
        Ok(Self {
            text,
            context,
            model_id: model_id.into(),
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn context(&self) -> Option<&str> {
        self.context.as_deref()
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// The payload actually sent to the provider: the context window when
    /// present, otherwise the bare text.
    pub fn payload(&self) -> &str {
        self.context.as_deref().unwrap_or(&self.text)
    }

    /// Content-addressed cache key over (model_id, text, context), so
    /// re-chunking that preserves the window text reuses cached vectors.
    pub fn cache_key(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.model_id.as_bytes());
        hasher.update([0x1f]);
        hasher.update(self.text.as_bytes());
        hasher.update([0x1f]);
        match &self.context {
            None => hasher.update([0x00]),
            Some(context) => {
                hasher.update([0x01]);
                hasher.update(context.as_bytes());
            }
        }
        hex_digest(&hasher.finalize())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Anything that can turn text payloads into embedding vectors. Must be
/// callable from multiple threads.
pub trait EmbeddingProvider: Send + Sync {
    /// Embeds each input; the result has exactly one vector per input, in
    /// order.
    fn embed(&self, inputs: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError>;
}

/// How many payloads are sent to the provider per request.
const PROVIDER_BATCH_SIZE: usize = 64;

/// Provider plus cache plus dimension policing. All scoring code goes
/// through this service rather than talking to providers directly.
pub struct EmbeddingService {
    provider: Box<dyn EmbeddingProvider>,
    model_id: String,
    cache: Option<DiskCache>,
    memo: RwLock<HashMap<String, EmbeddingVector>>,
    expected_dimension: RwLock<Option<usize>>,
}

impl EmbeddingService {
    pub fn new(
        provider: Box<dyn EmbeddingProvider>,
        model_id: impl Into<String>,
        cache: Option<DiskCache>,
    ) -> Self {
        Self {
            provider,
            model_id: model_id.into(),
            cache,
            memo: RwLock::new(HashMap::new()),
            expected_dimension: RwLock::new(None),
        }
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// Builds a request against this service's model.
    pub fn request(
        &self,
        text: impl Into<String>,
        context: Option<String>,
    ) -> Result<EmbeddingRequest, EmbeddingError> {
        EmbeddingRequest::new(text, context, self.model_id.clone())
    }

    /// Embeds one word, in the given context when present.
    pub fn embed_in_context(
        &self,
        word: &str,
        context: Option<&str>,
    ) -> Result<EmbeddingVector, EmbeddingError> {
        let request = self.request(word, context.map(str::to_string))?;
        Ok(self.embed_batch(std::slice::from_ref(&request))?.remove(0))
    }

    /// Embeds a batch of requests, going to the provider only for keys not
    /// already in the memo or disk cache (deduplicated, in
    /// first-appearance order).
    pub fn embed_batch(
        &self,
        requests: &[EmbeddingRequest],
    ) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        let keys: Vec<String> = requests.iter().map(EmbeddingRequest::cache_key).collect();

        let mut missing: Vec<(String, String)> = Vec::new(); // (key, payload)
        let mut queued = HashSet::new();
        for (request, key) in requests.iter().zip(&keys) {
            if self.known(key) || !queued.insert(key.clone()) {
                continue;
            }
            match self.cache.as_ref().and_then(|c| c.get(key)) {
                Some(vector) => self.admit(key.clone(), vector, false)?,
                None => missing.push((key.clone(), request.payload().to_string())),
            }
        }

        for batch in missing.chunks(PROVIDER_BATCH_SIZE) {
            let payloads: Vec<String> = batch.iter().map(|(_, p)| p.clone()).collect();
            let vectors = self.provider.embed(&payloads)?;
            if vectors.len() != payloads.len() {
                return Err(EmbeddingError::MalformedProviderResponse {
                    message: format!(
                        "provider returned {} vectors for {} inputs",
                        vectors.len(),
                        payloads.len()
                    ),
                });
            }
            for ((key, _), vector) in batch.iter().zip(vectors) {
                self.admit(key.clone(), vector, true)?;
            }
        }

        let memo = self.memo.read().expect("embedding memo poisoned");
        keys.iter()
            .map(|key| {
                memo.get(key).cloned().ok_or_else(|| {
                    EmbeddingError::MalformedProviderResponse {
                        message: "provider batch completed without producing a vector".to_string(),
                    }
                })
            })
            .collect()
    }

    fn known(&self, key: &str) -> bool {
        self.memo
            .read()
            .expect("embedding memo poisoned")
            .contains_key(key)
    }

    /// Records a vector under a key after checking dimension stability,
    /// optionally writing it through to the disk cache.
    fn admit(
        &self,
        key: String,
        vector: EmbeddingVector,
        write_cache: bool,
    ) -> Result<(), EmbeddingError> {
        self.check_dimension(vector.dimension())?;
        if write_cache {
            if let Some(cache) = &self.cache {
                cache.put(&key, &self.model_id, &vector)?;
            }
        }
        self.memo
            .write()
            .expect("embedding memo poisoned")
            .insert(key, vector);
        Ok(())
    }

    fn check_dimension(&self, got: usize) -> Result<(), EmbeddingError> {
        let mut expected = self
            .expected_dimension
            .write()
            .expect("dimension lock poisoned");
        match *expected {
            None => {
                *expected = Some(got);
                Ok(())
            }
            Some(expected) if expected == got => Ok(()),
            Some(expected) => Err(EmbeddingError::DimensionDrift {
                model_id: self.model_id.clone(),
                expected,
                got,
            }),
        }
    }
}
