//! The five subcommands. Each is a thin orchestration of the core
//! library: load inputs, run the pipeline stage, write canonical output.

pub mod audit;
pub mod correlate;
pub mod evaluate;
pub mod extract;
pub mod score;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use ceat_core::evaluation::{canonical_json, ConfigEcho, ScoreEntry};
use ceat_core::extraction::WordSetFile;
use serde::Serialize;

use crate::config::RunConfig;
use crate::runtime::{EmbeddingRuntime, LlmRuntime};

/// Canonical JSON (sorted keys, fixed floats) plus trailing newline, for
/// any serializable document.
fn canonical<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let value = serde_json::to_value(value).context("cannot serialize output")?;
    let mut out = canonical_json(&value);
    out.push('\n');
    Ok(out)
}

/// Writes to `--out` when given, stdout otherwise.
fn write_output(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("cannot create {}", parent.display()))?;
            }
            std::fs::write(path, content)
                .with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .context("cannot write to stdout")
        }
    }
}

/// Reads a word-set file: `{"groups":[{"name","target_words","attribute_words"}]}`.
/// Extra top-level keys (a full extraction result, say) are tolerated.
fn read_word_sets(path: &Path) -> anyhow::Result<WordSetFile> {
    let content = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read word-set file {}", path.display()))?;
    serde_json::from_str(&content)
        .with_context(|| format!("word-set file {} violates the schema", path.display()))
}

/// Reads a score file: `{"scores":[{"corpus_id","text_score"}]}`. Entries
/// may carry extra detail (full per-pair scores); only the id and the
/// text score are read.
fn read_scores(path: &Path) -> anyhow::Result<Vec<ScoreEntry>> {
    #[derive(serde::Deserialize)]
    struct ScoresDocument {
        scores: Vec<ScoreEntry>,
    }
    let content = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read score file {}", path.display()))?;
    let document: ScoresDocument = serde_json::from_str(&content)
        .with_context(|| format!("score file {} violates the schema", path.display()))?;
    Ok(document.scores)
}

/// The configuration echo embedded in reports. LLM fields appear only
/// for commands that ran an LLM stage.
fn config_echo(
    config: &RunConfig,
    embedding: &EmbeddingRuntime,
    llm: Option<&LlmRuntime>,
) -> ConfigEcho {
    ConfigEcho {
        seed: config.seed,
        n_samples: config.samples,
        embedding_provider: embedding.provider_kind.as_str().to_string(),
        embedding_model: embedding.model_id.clone(),
        llm_model: llm.map(|l| l.model_id.clone()),
        llm_mode: llm.map(|l| l.mode.as_str().to_string()),
        chunk_max_chars: config.chunk_policy.max_chars,
        chunk_overlap_chars: config.chunk_policy.overlap_chars,
        retrieval_k: llm.map(|_| config.llm.retrieval_k),
    }
}
