//! `ceat evaluate`: compare extracted word sets against ground truth,
//! group by group, with an optional score-vector comparison.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::bail;
use ceat_core::corpus::normalize_text;
use ceat_core::evaluation::{compare_scores, render_report, wordset_similarity, AuditReport};
use ceat_core::extraction::GroupExtraction;

use super::{config_echo, read_scores, read_word_sets, write_output};
use crate::config::RunConfig;
use crate::runtime::build_embedding_service;

/// Pairs ground-truth groups with extracted groups by (case- and
/// whitespace-insensitive) name, preserving ground-truth order. Names
/// present on only one side are an error listing every offender.
fn match_groups<'a>(
    gt: &'a [GroupExtraction],
    extracted: &'a [GroupExtraction],
) -> anyhow::Result<Vec<(&'a GroupExtraction, &'a GroupExtraction)>> {
    let mut pairs = Vec::with_capacity(gt.len());
    let mut unmatched = Vec::new();
    for group in gt {
        match extracted
            .iter()
            .find(|e| normalize_text(&e.group_name) == normalize_text(&group.group_name))
        {
            Some(counterpart) => pairs.push((group, counterpart)),
            None => unmatched.push(format!("{:?} (ground truth only)", group.group_name)),
        }
    }
    for group in extracted {
        if !gt
            .iter()
            .any(|g| normalize_text(&g.group_name) == normalize_text(&group.group_name))
        {
            unmatched.push(format!("{:?} (extracted only)", group.group_name));
        }
    }
    if !unmatched.is_empty() {
        bail!(
            "group names do not match across the word-set files: {}",
            unmatched.join(", ")
        );
    }
    Ok(pairs)
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    ground_truth: &Path,
    extracted: &Path,
    gt_scores: Option<&Path>,
    extracted_scores: Option<&Path>,
) -> anyhow::Result<()> {
    let gt_file = read_word_sets(ground_truth)?;
    let extracted_file = read_word_sets(extracted)?;
    let pairs = match_groups(&gt_file.groups, &extracted_file.groups)?;

    let embedding = build_embedding_service(config)?;
    let mut comparisons = Vec::with_capacity(pairs.len());
    for (gt_group, extracted_group) in pairs {
        comparisons.push(wordset_similarity(
            gt_group,
            extracted_group,
            &embedding.service,
        )?);
    }

    let (pearson, score_deltas) = match (gt_scores, extracted_scores) {
        (Some(left), Some(right)) => {
            let comparison = compare_scores(&read_scores(left)?, &read_scores(right)?)?;
            (Some(comparison.pearson), comparison.deltas)
        }
        (None, None) => (None, Vec::new()),
        _ => bail!("score comparison needs both --gt-scores and --extracted-scores"),
    };

    let report = AuditReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        configuration: config_echo(config, &embedding, None),
        text_scores: BTreeMap::new(),
        word_set_comparisons: comparisons,
        pearson,
        score_deltas,
        validation_issues: Vec::new(),
        notes: Vec::new(),
    };
    write_output(&config.out, &render_report(&report, config.format)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(name: &str) -> GroupExtraction {
        GroupExtraction {
            group_name: name.to_string(),
            target_words: vec![name.to_string()],
            attribute_words: vec!["kind".to_string()],
        }
    }

    #[test]
    fn matches_names_case_insensitively_in_gt_order() {
        let gt = vec![group("Mexican"), group("American")];
        let extracted = vec![group("american"), group("MEXICAN")];
        let pairs = match_groups(&gt, &extracted).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].0.group_name, "Mexican");
        assert_eq!(pairs[0].1.group_name, "MEXICAN");
        assert_eq!(pairs[1].0.group_name, "American");
    }

    #[test]
    fn unmatched_names_from_both_sides_are_listed() {
        let gt = vec![group("Mexican"), group("German")];
        let extracted = vec![group("Mexican"), group("Italian")];
        let err = match_groups(&gt, &extracted).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("\"German\" (ground truth only)"), "{message}");
        assert!(message.contains("\"Italian\" (extracted only)"), "{message}");
    }
}
