//! Retrieval-augmented, few-shot-prompted extraction of demographic word
//! sets from a corpus.
//!
//! The pipeline: rank chunks against a fixed library of bias-probe
//! queries, build one self-contained prompt over the union of retrieved
//! chunks, complete it through an LLM client (live, recording, or
//! replay), parse the structured output, validate it against the corpus,
//! and clean it down to admissible groups. Everything after the LLM call
//! is deterministic; with the replay client and the local embedding
//! provider the whole pipeline is.

mod llm;
mod parse;
mod prompt;
mod validate;

pub use llm::{
    record_store_path, HttpLlmClient, LlmClient, LlmConfig, RecordingClient, ReplayClient,
};
pub use parse::parse_extraction;
pub use prompt::{
    bias_probe_queries, build_prompt, prompt_hash, BiasCategory, FewShotExample, PromptTemplate,
};
pub use validate::{
    balance_sets, clean_groups, validate_extraction, BalancedSets, IssueRule, IssueSeverity,
    ValidationIssue,
};

use serde::{Deserialize, Serialize};

use crate::corpus::Chunk;
use crate::embedding::{EmbeddingError, EmbeddingService};
use crate::stats::cosine;

#[derive(Debug, thiserror::Error)]
pub enum ExtractionError {
    #[error("model output violates the extraction schema: {detail}")]
    SchemaViolation { detail: String },
    #[error("invalid prompt template: {detail}")]
    InvalidTemplate { detail: String },
    #[error("invalid LLM config: {detail}")]
    InvalidLlmConfig { detail: String },
    #[error("API key environment variable {env_name} is not set")]
    MissingApiKey { env_name: String },
    #[error("LLM endpoint unavailable after {attempts} attempt(s): {message}")]
    LlmUnavailable { attempts: usize, message: String },
    #[error("malformed LLM response: {detail}")]
    MalformedLlmResponse { detail: String },
    #[error("no recorded response for prompt hash {prompt_hash} in replay store {store}")]
    ReplayMiss { prompt_hash: String, store: String },
    #[error("failed to write recording under {path}: {source}")]
    RecordIo {
        path: String,
        source: std::io::Error,
    },
    #[error("retrieval requires k >= 1")]
    InvalidK,
    #[error("retrieval requires a non-empty chunk list")]
    NoChunks,
    #[error("extraction produced no admissible word sets: {summary}")]
    NoAdmissibleGroups { summary: String },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// One extracted demographic group: who it names and what the text says
/// about them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupExtraction {
    #[serde(rename = "name")]
    pub group_name: String,
    pub target_words: Vec<String>,
    pub attribute_words: Vec<String>,
}

/// On-disk word-set schema, shared by extraction output and ground-truth
/// files: `{"groups": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSetFile {
    pub groups: Vec<GroupExtraction>,
}

/// Where an extraction came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_id: String,
    pub prompt_hash: String,
    /// Unix seconds; absent on replayed runs so their outputs stay
    /// byte-identical across time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// The outcome of one extraction run: admissible groups plus everything
/// needed to audit how they were obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub groups: Vec<GroupExtraction>,
    pub raw_model_output: String,
    pub validation_issues: Vec<ValidationIssue>,
    pub provenance: Provenance,
}

/// Ranks chunks by cosine similarity between the query embedding and each
/// chunk embedding, returning the top `k` (all chunks when `k` exceeds
/// the count). Ties break by (doc_id, chunk index).
pub fn retrieve_chunks(
    query: &str,
    chunks: &[Chunk],
    k: usize,
    embeddings: &EmbeddingService,
) -> Result<Vec<Chunk>, ExtractionError> {
    if k == 0 {
        return Err(ExtractionError::InvalidK);
    }
    if chunks.is_empty() {
        return Err(ExtractionError::NoChunks);
    }

    let query_vector = embeddings.embed_in_context(query, None)?;
    let mut requests = Vec::with_capacity(chunks.len());
    for chunk in chunks {
        requests.push(embeddings.request(&chunk.text, None)?);
    }
    let chunk_vectors = embeddings.embed_batch(&requests)?;

    let mut ranked: Vec<(f64, &Chunk)> = chunks
        .iter()
        .zip(&chunk_vectors)
        .map(|(chunk, vector)| {
            let score = cosine(&query_vector, vector).map_err(EmbeddingError::InvalidVector)?;
            Ok((score, chunk))
        })
        .collect::<Result<_, ExtractionError>>()?;

    ranked.sort_by(|(score_a, chunk_a), (score_b, chunk_b)| {
        score_b
            .partial_cmp(score_a)
            .expect("cosine scores are finite")
            .then_with(|| (&chunk_a.doc_id, chunk_a.index).cmp(&(&chunk_b.doc_id, chunk_b.index)))
    });

    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(_, chunk)| chunk.clone())
        .collect())
}

/// The inputs of one extraction run.
pub struct ExtractionPipeline<'a> {
    pub chunks: &'a [Chunk],
    pub template: &'a PromptTemplate,
    pub llm: &'a dyn LlmClient,
    pub llm_model_id: &'a str,
    pub embeddings: &'a EmbeddingService,
    /// Chunks retrieved per probe query.
    pub top_k: usize,
    /// Record the wall-clock time in provenance. Leave off for replayed
    /// runs so their outputs are byte-identical across time.
    pub stamp_time: bool,
}

pub const DEFAULT_RETRIEVAL_K: usize = 8;

/// Runs extraction end to end. Fails with [`ExtractionError::NoAdmissibleGroups`]
/// when validation leaves fewer than two usable groups, since scoring
/// needs a pair.
pub fn run_extraction(pipeline: &ExtractionPipeline) -> Result<ExtractionResult, ExtractionError> {
    pipeline.template.validate()?;

    // union of per-category retrievals, first appearance wins, ordered by
    // (gender, national, racial) then rank
    let mut retrieved: Vec<Chunk> = Vec::new();
    for (_category, query) in bias_probe_queries() {
        for chunk in retrieve_chunks(query, pipeline.chunks, pipeline.top_k, pipeline.embeddings)? {
            if !retrieved
                .iter()
                .any(|c| c.doc_id == chunk.doc_id && c.index == chunk.index)
            {
                retrieved.push(chunk);
            }
        }
    }

    let prompt = build_prompt(pipeline.template, &retrieved);
    let raw_model_output = pipeline.llm.complete(&prompt)?;
    let parsed = parse_extraction(&raw_model_output)?;
    let (groups, validation_issues) = clean_groups(&parsed, pipeline.chunks);

    if groups.len() < 2 {
        let summary = if validation_issues.is_empty() {
            format!("model produced {} group(s), need at least 2", groups.len())
        } else {
            validation_issues
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        };
        return Err(ExtractionError::NoAdmissibleGroups { summary });
    }

    let timestamp = if pipeline.stamp_time {
        Some(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    } else {
        None
    };

    Ok(ExtractionResult {
        groups,
        raw_model_output,
        validation_issues,
        provenance: Provenance {
            model_id: pipeline.llm_model_id.to_string(),
            prompt_hash: prompt_hash(&prompt),
            timestamp,
        },
    })
}
