//! Append-only on-disk embedding cache.
//!
//! One line-delimited JSON record per vector, keyed by content hash.
//! Corrupt lines are skipped with a warning and never abort a run — the
//! cache is a pure accelerator and must not be able to fail an audit.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::EmbeddingError;
use crate::stats::EmbeddingVector;

const CACHE_FILE_NAME: &str = "embeddings.jsonl";

/// One cached vector as stored on disk. serde_json prints f64 components
/// with shortest-round-trip formatting and (with the `float_roundtrip`
/// feature, which this crate enables) parses them back exactly, so
/// vectors survive a write/read cycle bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model: String,
    pub vector: Vec<f64>,
}

/// Thread-safe disk cache: concurrent readers, serialized appends.
pub struct DiskCache {
    path: PathBuf,
    entries: RwLock<HashMap<String, EmbeddingVector>>,
    appender: Mutex<std::fs::File>,
}

impl DiskCache {
    /// Opens (or creates) the cache under `dir`, loading every readable
    /// record. Later records win on duplicate keys.
    pub fn new(dir: &Path) -> Result<Self, EmbeddingError> {
        let as_cache_err = |source: std::io::Error, path: &Path| EmbeddingError::CacheIo {
            path: path.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(|e| as_cache_err(e, dir))?;
        let path = dir.join(CACHE_FILE_NAME);

        let mut entries = HashMap::new();
        if path.exists() {
            let content = std::fs::read_to_string(&path).map_err(|e| as_cache_err(e, &path))?;
            for (line_no, line) in content.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheEntry>(line)
                    .map_err(|e| e.to_string())
                    .and_then(|entry| {
                        EmbeddingVector::new(entry.vector)
                            .map(|v| (entry.key, v))
                            .map_err(|e| e.to_string())
                    }) {
                    Ok((key, vector)) => {
                        entries.insert(key, vector);
                    }
                    Err(reason) => log::warn!(
                        "skipping corrupt cache record {}:{}: {reason}",
                        path.display(),
                        line_no + 1
                    ),
                }
            }
        }

        let appender = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| as_cache_err(e, &path))?;

        Ok(Self {
            path,
            entries: RwLock::new(entries),
            appender: Mutex::new(appender),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<EmbeddingVector> {
        self.entries
            .read()
            .expect("cache lock poisoned")
            .get(key)
            .cloned()
    }

    /// Stores a vector; a key already present is left untouched (entries
    /// are content-addressed, so a second write would be identical).
    pub fn put(
        &self,
        key: &str,
        model: &str,
        vector: &EmbeddingVector,
    ) -> Result<(), EmbeddingError> {
        {
            let entries = self.entries.read().expect("cache lock poisoned");
            if entries.contains_key(key) {
                return Ok(());
            }
        }
        let entry = CacheEntry {
            key: key.to_string(),
            model: model.to_string(),
            vector: vector.components().to_vec(),
        };
        let line = serde_json::to_string(&entry).expect("cache entry serializes");
        {
            let mut appender = self.appender.lock().expect("cache appender poisoned");
            appender
                .write_all(format!("{line}\n").as_bytes())
                .and_then(|_| appender.flush())
                .map_err(|source| EmbeddingError::CacheIo {
                    path: self.path.display().to_string(),
                    source,
                })?;
        }
        self.entries
            .write()
            .expect("cache lock poisoned")
            .insert(key.to_string(), vector.clone());
        Ok(())
    }
}
