//! Scoring a corpus against word sets, averaging across group pairs,
//! comparing extracted word sets to ground truth, and correlating the
//! resulting scores.
//!
//! The scoring path composes the other modules: contextual samples come
//! from the corpus module, vectors from the embedding service, and the
//! per-sample effect sizes are combined by the random-effects machinery
//! in the statistics module.

mod report;

pub use report::{canonical_json, render_report, AuditReport, ConfigEcho, ReportFormat};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    context_window, sample_contexts_stream, Chunk, ContextAssignment, StimulusWordSets,
    CONTEXT_RADIUS_CHARS,
};
use crate::embedding::{EmbeddingError, EmbeddingRequest, EmbeddingService};
use crate::extraction::{balance_sets, GroupExtraction};
use crate::stats::{
    combined_effect_size, cosine, effect_size, pearson, within_variance, CorrelationResult,
    EffectSizeSample, EmbeddingVector, MagnitudeLabel, StatsError, StimulusEmbeddings,
};

#[derive(Debug, thiserror::Error)]
pub enum EvaluationError {
    #[error("scoring requires n_samples >= 1")]
    NoSamples,
    #[error("scoring requires at least 2 groups, got {got}")]
    InsufficientGroups { got: usize },
    #[error("pairwise average requires at least one pair score")]
    NoPairs,
    #[error("word-set similarity requires non-empty groups on both sides")]
    EmptyGroup,
    #[error("score lists have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("corpus id {corpus_id:?} is missing from the extracted scores")]
    UnknownCorpusId { corpus_id: String },
    #[error("occurrence references unknown chunk {doc_id}#{index}")]
    MissingChunk { doc_id: String, index: usize },
    #[error("report contains a non-finite number in {field}")]
    NonFiniteInReport { field: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Combined effect size for one pair of groups over one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    /// Group names in canonical order — the order they appear in the
    /// word-set file. The sign of `ces` is relative to this order.
    pub group_pair: (String, String),
    pub ces: f64,
    pub magnitude: MagnitudeLabel,
    pub n_samples: usize,
    /// Stimulus words with no corpus occurrence, embedded standalone.
    pub fallback_words: Vec<String>,
}

/// All pair scores for one corpus plus their signed mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextScore {
    pub corpus_id: String,
    pub pair_scores: Vec<PairScore>,
    pub text_score: f64,
}

/// One row of a score file: `{"scores": [{"corpus_id", "text_score"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub corpus_id: String,
    pub text_score: f64,
}

impl From<&TextScore> for ScoreEntry {
    fn from(score: &TextScore) -> Self {
        Self {
            corpus_id: score.corpus_id.clone(),
            text_score: score.text_score,
        }
    }
}

/// On-disk score file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFile {
    pub scores: Vec<ScoreEntry>,
}

/// The word lists of one side of a word-set comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordLists {
    pub target_words: Vec<String>,
    pub attribute_words: Vec<String>,
}

impl From<&GroupExtraction> for WordLists {
    fn from(group: &GroupExtraction) -> Self {
        Self {
            target_words: group.target_words.clone(),
            attribute_words: group.attribute_words.clone(),
        }
    }
}

/// Semantic alignment between a ground-truth group and its extracted
/// counterpart: cosine of mean-pooled unit-normalized word embeddings
/// over targets + attributes, with per-component similarities alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSetComparison {
    pub group_name: String,
    pub similarity: f64,
    pub similarity_targets: Option<f64>,
    pub similarity_attributes: Option<f64>,
    pub gt_words: WordLists,
    pub extracted_words: WordLists,
}

/// Per-corpus deviation between ground-truth and extracted scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDelta {
    pub corpus_id: String,
    pub gt_score: f64,
    pub extracted_score: f64,
    /// Absolute deviation |gt − extracted|.
    pub delta: f64,
}

/// Output of [`compare_scores`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreComparison {
    pub pearson: CorrelationResult,
    pub deltas: Vec<ScoreDelta>,
}

/// Scores one balanced group pair over a corpus.
///
/// Draws `n_samples` contextual samples on the ChaCha stream
/// `(seed, pair_index)`, embeds every assignment (context window for real
/// occurrences, bare phrase for fallbacks), computes the per-sample
/// effect size and within-study variance, and combines them under the
/// random-effects model.
#[allow(clippy::too_many_arguments)]
pub fn score_pair(
    chunks: &[Chunk],
    sets: &StimulusWordSets,
    group_pair: (String, String),
    embeddings: &EmbeddingService,
    n_samples: usize,
    seed: u64,
    pair_index: u64,
) -> Result<PairScore, EvaluationError> {
    if n_samples == 0 {
        return Err(EvaluationError::NoSamples);
    }

    let chunk_by_key: BTreeMap<(&str, usize), &Chunk> = chunks
        .iter()
        .map(|c| ((c.doc_id.as_str(), c.index), c))
        .collect();

    let samples = sample_contexts_stream(sets, chunks, n_samples, seed, pair_index);

    // one flat request list: per sample, every stimulus word in set order
    let word_lists: [&[String]; 4] = [
        &sets.targets_x,
        &sets.targets_y,
        &sets.attributes_a,
        &sets.attributes_b,
    ];
    let stride: usize = word_lists.iter().map(|l| l.len()).sum();
    let mut requests: Vec<EmbeddingRequest> = Vec::with_capacity(n_samples * stride);
    for sample in &samples {
        for list in word_lists {
            for word in list {
                let assignment = sample
                    .assignment
                    .get(word)
                    .expect("every stimulus word has an assignment");
                let context = match assignment {
                    ContextAssignment::StandaloneFallback => None,
                    ContextAssignment::Occurrence(occ) => {
                        let chunk = chunk_by_key
                            .get(&(occ.doc_id.as_str(), occ.chunk_index))
                            .ok_or_else(|| EvaluationError::MissingChunk {
                                doc_id: occ.doc_id.clone(),
                                index: occ.chunk_index,
                            })?;
                        Some(
                            context_window(&chunk.text, occ.span, CONTEXT_RADIUS_CHARS)
                                .to_string(),
                        )
                    }
                };
                requests.push(embeddings.request(word, context)?);
            }
        }
    }
    let vectors = embeddings.embed_batch(&requests)?;

    let mut effect_sizes = Vec::with_capacity(n_samples);
    let n_x = sets.targets_x.len();
    let n_y = sets.targets_y.len();
    for (sample_index, sample_vectors) in vectors.chunks(stride).enumerate() {
        let mut cursor = 0usize;
        let mut take = |n: usize| {
            let slice = sample_vectors[cursor..cursor + n].to_vec();
            cursor += n;
            slice
        };
        let stimulus = StimulusEmbeddings::new(
            take(n_x),
            take(n_y),
            take(sets.attributes_a.len()),
            take(sets.attributes_b.len()),
        )?;
        let es = effect_size(&stimulus)?;
        let within = within_variance(es, n_x, n_y);
        effect_sizes.push(EffectSizeSample::new(es, within, sample_index)?);
    }

    let combined = combined_effect_size(&effect_sizes)?;

    // fallback-ness is a static property of (word, corpus); read it off
    // the first sample
    let fallback_words: Vec<String> = sets
        .words()
        .into_iter()
        .filter(|word| {
            matches!(
                samples[0].assignment.get(*word),
                Some(ContextAssignment::StandaloneFallback)
            )
        })
        .map(str::to_string)
        .collect();

    Ok(PairScore {
        group_pair,
        ces: combined.ces,
        magnitude: combined.magnitude,
        n_samples,
        fallback_words,
    })
}

/// Signed arithmetic mean of pair ces values in canonical order.
pub fn pairwise_average(pair_scores: &[PairScore]) -> Result<f64, EvaluationError> {
    if pair_scores.is_empty() {
        return Err(EvaluationError::NoPairs);
    }
    Ok(pair_scores.iter().map(|p| p.ces).sum::<f64>() / pair_scores.len() as f64)
}

/// Scores a corpus over every unordered pair of groups (i < j in file
/// order), balancing each pair first. Returns the text score plus notes
/// on words cut by balancing.
pub fn score_text(
    corpus_id: &str,
    chunks: &[Chunk],
    groups: &[GroupExtraction],
    embeddings: &EmbeddingService,
    n_samples: usize,
    seed: u64,
) -> Result<(TextScore, Vec<String>), EvaluationError> {
    if groups.len() < 2 {
        return Err(EvaluationError::InsufficientGroups { got: groups.len() });
    }

    let mut pair_scores = Vec::new();
    let mut truncation_notes = Vec::new();
    let mut pair_index = 0u64;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let balanced = balance_sets(&groups[i], &groups[j], chunks);
            if !balanced.truncated_words.is_empty() {
                truncation_notes.push(format!(
                    "pair ({}, {}): balancing dropped {}",
                    groups[i].group_name,
                    groups[j].group_name,
                    balanced
                        .truncated_words
                        .iter()
                        .map(|w| format!("{w:?}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            pair_scores.push(score_pair(
                chunks,
                &balanced.sets,
                (groups[i].group_name.clone(), groups[j].group_name.clone()),
                embeddings,
                n_samples,
                seed,
                pair_index,
            )?);
            pair_index += 1;
        }
    }

    let text_score = pairwise_average(&pair_scores)?;
    Ok((
        TextScore {
            corpus_id: corpus_id.to_string(),
            pair_scores,
            text_score,
        },
        truncation_notes,
    ))
}

/// Mean of unit-normalized standalone embeddings of a group's words
/// (targets + attributes, or one component list).
fn pooled_vector(
    words: &[&String],
    embeddings: &EmbeddingService,
) -> Result<EmbeddingVector, EvaluationError> {
    let requests: Vec<EmbeddingRequest> = words
        .iter()
        .map(|w| embeddings.request(w.as_str(), None))
        .collect::<Result<_, _>>()?;
    let vectors = embeddings.embed_batch(&requests)?;
    let dimension = vectors[0].dimension();
    let mut sum = vec![0.0; dimension];
    for vector in &vectors {
        let unit = vector.normalized()?;
        for (accumulator, component) in sum.iter_mut().zip(unit.components()) {
            *accumulator += component;
        }
    }
    let n = vectors.len() as f64;
    for component in &mut sum {
        *component /= n;
    }
    EmbeddingVector::new(sum).map_err(EvaluationError::from)
}

/// Measures semantic alignment between a ground-truth group and its
/// extracted counterpart. Pooling is order-free, so permuting word lists
/// changes nothing.
pub fn wordset_similarity(
    gt: &GroupExtraction,
    extracted: &GroupExtraction,
    embeddings: &EmbeddingService,
) -> Result<WordSetComparison, EvaluationError> {
    fn union(g: &GroupExtraction) -> Vec<&String> {
        g.target_words.iter().chain(&g.attribute_words).collect()
    }
    let gt_union = union(gt);
    let extracted_union = union(extracted);
    if gt_union.is_empty() || extracted_union.is_empty() {
        return Err(EvaluationError::EmptyGroup);
    }

    let similarity = cosine(
        &pooled_vector(&gt_union, embeddings)?,
        &pooled_vector(&extracted_union, embeddings)?,
    )?;

    let component = |a: &[String], b: &[String]| -> Result<Option<f64>, EvaluationError> {
        if a.is_empty() || b.is_empty() {
            return Ok(None);
        }
        let a_refs: Vec<&String> = a.iter().collect();
        let b_refs: Vec<&String> = b.iter().collect();
        Ok(Some(cosine(
            &pooled_vector(&a_refs, embeddings)?,
            &pooled_vector(&b_refs, embeddings)?,
        )?))
    };

    Ok(WordSetComparison {
        group_name: gt.group_name.clone(),
        similarity,
        similarity_targets: component(&gt.target_words, &extracted.target_words)?,
        similarity_attributes: component(&gt.attribute_words, &extracted.attribute_words)?,
        gt_words: WordLists::from(gt),
        extracted_words: WordLists::from(extracted),
    })
}

/// Correlates ground-truth and extracted text scores, aligning by corpus
/// id, and reports the per-text absolute deviations.
pub fn compare_scores(
    gt_scores: &[ScoreEntry],
    extracted_scores: &[ScoreEntry],
) -> Result<ScoreComparison, EvaluationError> {
    if gt_scores.len() != extracted_scores.len() {
        return Err(EvaluationError::LengthMismatch {
            left: gt_scores.len(),
            right: extracted_scores.len(),
        });
    }

    let mut gt_values = Vec::with_capacity(gt_scores.len());
    let mut extracted_values = Vec::with_capacity(gt_scores.len());
    let mut deltas = Vec::with_capacity(gt_scores.len());
    for gt in gt_scores {
        let extracted = extracted_scores
            .iter()
            .find(|e| e.corpus_id == gt.corpus_id)
            .ok_or_else(|| EvaluationError::UnknownCorpusId {
                corpus_id: gt.corpus_id.clone(),
            })?;
        gt_values.push(gt.text_score);
        extracted_values.push(extracted.text_score);
        deltas.push(ScoreDelta {
            corpus_id: gt.corpus_id.clone(),
            gt_score: gt.text_score,
            extracted_score: extracted.text_score,
            delta: (gt.text_score - extracted.text_score).abs(),
        });
    }

    let pearson = pearson(&gt_values, &extracted_values)?;
    Ok(ScoreComparison { pearson, deltas })
}
