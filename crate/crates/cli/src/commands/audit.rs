//! `ceat audit`: the whole pipeline in one command — extract word sets
//! per corpus, validate, score, optionally compare against ground truth,
//! and render the report.
//!
//! A corpus where extraction finds nothing usable is reported, not
//! failed: the audit's answer is then "no demographic groups found".

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use ceat_core::corpus::normalize_text;
use ceat_core::evaluation::{
    render_report, score_text, wordset_similarity, AuditReport, ScoreDelta, ScoreEntry,
    TextScore,
};
use ceat_core::extraction::{
    run_extraction, ExtractionError, ExtractionPipeline, PromptTemplate, WordSetFile,
};
use ceat_core::stats::pearson;

use super::{config_echo, read_word_sets, write_output};
use crate::config::{LlmMode, RunConfig};
use crate::runtime::{build_embedding_service, build_llm_client, load_corpora, Corpus};

const GROUND_TRUTH: &str = "ground_truth";
const EXTRACTED: &str = "extracted";

pub fn run(config: &RunConfig, ground_truth: Option<&Path>) -> anyhow::Result<()> {
    let corpora = load_corpora(config)?;
    let embedding = build_embedding_service(config)?;
    let llm = build_llm_client(config)?;
    let template = PromptTemplate::default();
    let gt_file: Option<WordSetFile> = ground_truth.map(read_word_sets).transpose()?;
    let multi_corpus = corpora.len() > 1;

    let mut text_scores: BTreeMap<String, Vec<TextScore>> = BTreeMap::new();
    let mut word_set_comparisons = Vec::new();
    let mut validation_issues = Vec::new();
    let mut notes = Vec::new();

    for corpus in &corpora {
        match extract_for(
            corpus,
            config,
            &embedding.service,
            llm.client.as_ref(),
            &llm.model_id,
            llm.mode,
            &template,
        ) {
            Ok(result) => {
                validation_issues.extend(result.validation_issues.iter().cloned().map(
                    |mut issue| {
                        if multi_corpus {
                            issue.detail = format!("corpus {}: {}", corpus.id, issue.detail);
                        }
                        issue
                    },
                ));
                let score =
                    score_for(corpus, &result.groups, &embedding.service, config, &mut notes)?;
                text_scores
                    .entry(EXTRACTED.to_string())
                    .or_default()
                    .push(score);

                if let Some(gt) = &gt_file {
                    for gt_group in &gt.groups {
                        let matched = result.groups.iter().find(|e| {
                            normalize_text(&e.group_name) == normalize_text(&gt_group.group_name)
                        });
                        match matched {
                            Some(extracted_group) => {
                                let mut comparison = wordset_similarity(
                                    gt_group,
                                    extracted_group,
                                    &embedding.service,
                                )?;
                                if multi_corpus {
                                    comparison.group_name =
                                        format!("{}/{}", corpus.id, comparison.group_name);
                                }
                                word_set_comparisons.push(comparison);
                            }
                            None => notes.push(format!(
                                "corpus {}: extraction produced no group matching {:?}",
                                corpus.id, gt_group.group_name
                            )),
                        }
                    }
                }
            }
            Err(err) => {
                // an inadmissible extraction is a reportable outcome, not
                // a failure of the audit itself
                let inadmissible = err
                    .chain()
                    .find_map(|cause| cause.downcast_ref::<ExtractionError>())
                    .is_some_and(|e| matches!(e, ExtractionError::NoAdmissibleGroups { .. }));
                if inadmissible {
                    notes.push(format!(
                        "corpus {}: no demographic groups found ({err:#})",
                        corpus.id
                    ));
                } else {
                    return Err(err);
                }
            }
        }

        if let Some(gt) = &gt_file {
            let score = score_for(corpus, &gt.groups, &embedding.service, config, &mut notes)?;
            text_scores
                .entry(GROUND_TRUTH.to_string())
                .or_default()
                .push(score);
        }
    }

    let (pearson_result, score_deltas) = cross_variant_comparison(&text_scores, &mut notes);

    let report = AuditReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        configuration: config_echo(config, &embedding, Some(&llm)),
        text_scores,
        word_set_comparisons,
        pearson: pearson_result,
        score_deltas,
        validation_issues,
        notes,
    };
    write_output(&config.out, &render_report(&report, config.format)?)
}

/// Scores one corpus against one set of groups, folding balancing notes
/// into the report's notes under the corpus id.
fn score_for(
    corpus: &Corpus,
    groups: &[ceat_core::extraction::GroupExtraction],
    service: &ceat_core::embedding::EmbeddingService,
    config: &RunConfig,
    notes: &mut Vec<String>,
) -> anyhow::Result<TextScore> {
    let (score, truncation_notes) = score_text(
        &corpus.id,
        &corpus.chunks,
        groups,
        service,
        config.samples,
        config.seed,
    )
    .with_context(|| format!("cannot score corpus {}", corpus.id))?;
    notes.extend(
        truncation_notes
            .into_iter()
            .map(|note| format!("corpus {}: {note}", corpus.id)),
    );
    Ok(score)
}

#[allow(clippy::too_many_arguments)]
fn extract_for(
    corpus: &Corpus,
    config: &RunConfig,
    embeddings: &ceat_core::embedding::EmbeddingService,
    llm: &dyn ceat_core::extraction::LlmClient,
    llm_model_id: &str,
    mode: LlmMode,
    template: &PromptTemplate,
) -> anyhow::Result<ceat_core::extraction::ExtractionResult> {
    let pipeline = ExtractionPipeline {
        chunks: &corpus.chunks,
        template,
        llm,
        llm_model_id,
        embeddings,
        top_k: config.llm.retrieval_k,
        stamp_time: mode != LlmMode::Replay,
    };
    run_extraction(&pipeline)
        .with_context(|| format!("extraction failed for corpus {}", corpus.id))
}

/// Aligns ground-truth and extracted text scores on the corpora both
/// variants actually scored, computing per-text deltas always and the
/// correlation when enough texts exist for it to be defined.
fn cross_variant_comparison(
    text_scores: &BTreeMap<String, Vec<TextScore>>,
    notes: &mut Vec<String>,
) -> (Option<ceat_core::stats::CorrelationResult>, Vec<ScoreDelta>) {
    let (Some(gt_scores), Some(extracted_scores)) =
        (text_scores.get(GROUND_TRUTH), text_scores.get(EXTRACTED))
    else {
        return (None, Vec::new());
    };

    let aligned: Vec<(ScoreEntry, ScoreEntry)> = gt_scores
        .iter()
        .filter_map(|gt| {
            extracted_scores
                .iter()
                .find(|e| e.corpus_id == gt.corpus_id)
                .map(|e| (ScoreEntry::from(gt), ScoreEntry::from(e)))
        })
        .collect();
    if aligned.is_empty() {
        return (None, Vec::new());
    }

    let deltas: Vec<ScoreDelta> = aligned
        .iter()
        .map(|(gt, extracted)| ScoreDelta {
            corpus_id: gt.corpus_id.clone(),
            gt_score: gt.text_score,
            extracted_score: extracted.text_score,
            delta: (gt.text_score - extracted.text_score).abs(),
        })
        .collect();

    let gt_values: Vec<f64> = aligned.iter().map(|(gt, _)| gt.text_score).collect();
    let extracted_values: Vec<f64> = aligned.iter().map(|(_, e)| e.text_score).collect();
    match pearson(&gt_values, &extracted_values) {
        Ok(result) => (Some(result), deltas),
        Err(reason) => {
            notes.push(format!("score correlation not computed: {reason}"));
            (None, deltas)
        }
    }
}
