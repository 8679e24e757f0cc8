//! Corpus bias auditing over contextualized embeddings.
//!
//! The crate measures associations between demographic target words and
//! attribute words as they appear *in context* in a text corpus, combines
//! per-context effect sizes under a random-effects model, and validates
//! LLM-extracted word sets against manually curated ones.
//!
//! Modules, in pipeline order:
//!
//! - [`corpus`] — loading, chunking, occurrence search, and seeded
//!   sampling of context assignments.
//! - [`embedding`] — an embedding service with caching and batching over
//!   a remote HTTP provider or the deterministic local provider.
//! - [`extraction`] — retrieval-augmented, few-shot LLM extraction of
//!   demographic word sets, plus schema parsing and verbatim validation.
//! - [`stats`] — cosine, association scores, effect sizes, and the
//!   random-effects combination with magnitude labels.
//! - [`evaluation`] — pair and text scoring, word-set similarity,
//!   Pearson comparison of score vectors, and report rendering.

pub mod corpus;
pub mod embedding;
pub mod evaluation;
pub mod extraction;
pub mod stats;

pub use corpus::{
    chunk, find_occurrences, load_corpus, load_documents, sample_contexts, Chunk, ChunkPolicy,
    ContextAssignment, ContextualSample, CorpusError, Document, Occurrence, StimulusWordSets,
};
pub use embedding::{
    deterministic_local_embed, DiskCache, EmbeddingError, EmbeddingProvider, EmbeddingRequest,
    EmbeddingService, HttpEmbeddingProvider, LocalProvider, ProviderConfig, RetryPolicy,
};
pub use evaluation::{
    canonical_json, compare_scores, pairwise_average, render_report, score_pair, score_text,
    wordset_similarity, AuditReport, ConfigEcho, EvaluationError, PairScore, ReportFormat,
    ScoreComparison, ScoreDelta, ScoreEntry, ScoreFile, TextScore, WordLists, WordSetComparison,
};
pub use extraction::{
    balance_sets, clean_groups, parse_extraction, validate_extraction, BalancedSets,
    BiasCategory, ExtractionError, ExtractionPipeline, ExtractionResult, GroupExtraction,
    HttpLlmClient, IssueRule, IssueSeverity, LlmClient, LlmConfig, PromptTemplate, Provenance,
    RecordingClient, ReplayClient, ValidationIssue, WordSetFile,
};
pub use stats::{
    combined_effect_size, cosine, effect_size, interpret_magnitude, pearson, CombinedEffect,
    CorrelationResult, EffectSizeSample, EmbeddingVector, MagnitudeLabel, StatsError,
    StimulusEmbeddings,
};
