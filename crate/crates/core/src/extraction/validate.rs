//! Validation and balancing of extracted word sets.
//!
//! Three extraction constraints are enforced against the corpus itself:
//! every word must occur verbatim (no inferred terms), word lists must be
//! non-empty, and duplicate group names are flagged. Words that fail
//! verbatim-ness are dropped individually as long as the group keeps at
//! least one valid word; groups whose lists empty out are dropped whole.
//! Surviving pairs of groups are then balanced to equal-sized lists, the
//! shape the effect-size statistics require.

use serde::{Deserialize, Serialize};

use super::GroupExtraction;
use crate::corpus::{find_occurrences, normalize_text, Chunk, StimulusWordSets};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueSeverity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueRule {
    NotVerbatim,
    EmptySet,
    DuplicateGroup,
    SchemaViolation,
}

/// One validation finding. Errors make a word or group inadmissible;
/// warnings are surfaced in the report but block nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: IssueSeverity,
    pub rule: IssueRule,
    pub detail: String,
}

impl ValidationIssue {
    fn error(rule: IssueRule, detail: String) -> Self {
        Self {
            severity: IssueSeverity::Error,
            rule,
            detail,
        }
    }

    fn warning(rule: IssueRule, detail: String) -> Self {
        Self {
            severity: IssueSeverity::Warning,
            rule,
            detail,
        }
    }
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let severity = match self.severity {
            IssueSeverity::Warning => "warning",
            IssueSeverity::Error => "error",
        };
        write!(f, "{severity} [{:?}]: {}", self.rule, self.detail)
    }
}

/// Checks extracted groups against the corpus. An empty issue list means
/// the extraction is admissible as-is.
pub fn validate_extraction(groups: &[GroupExtraction], chunks: &[Chunk]) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    for group in groups {
        for (list_name, words) in [
            ("target_words", &group.target_words),
            ("attribute_words", &group.attribute_words),
        ] {
            if words.is_empty() {
                issues.push(ValidationIssue::error(
                    IssueRule::EmptySet,
                    format!(
                        "group {:?} has an empty {list_name} list; extraction must be \
                         exhaustive and produce at least one entry",
                        group.group_name
                    ),
                ));
            }
            for word in words {
                if find_occurrences(word, chunks).is_empty() {
                    issues.push(ValidationIssue::error(
                        IssueRule::NotVerbatim,
                        format!(
                            "{list_name} entry {word:?} in group {:?} does not occur \
                             verbatim in the corpus; inferred terms are not allowed",
                            group.group_name
                        ),
                    ));
                }
            }
        }
    }

    let mut seen: Vec<(String, &str)> = Vec::new();
    for group in groups {
        let normalized = normalize_text(&group.group_name);
        if let Some((_, earlier)) = seen.iter().find(|(n, _)| *n == normalized) {
            issues.push(ValidationIssue::warning(
                IssueRule::DuplicateGroup,
                format!(
                    "group name {:?} duplicates {earlier:?} (case-insensitive)",
                    group.group_name
                ),
            ));
        } else {
            seen.push((normalized, &group.group_name));
        }
    }

    issues
}

/// Applies the validation failure policy: drop non-verbatim words
/// individually, deduplicate within lists (case/whitespace-insensitive),
/// and drop any group left without targets or attributes. Returns the
/// cleaned groups together with every issue found, including the
/// drop decisions themselves.
pub fn clean_groups(
    groups: &[GroupExtraction],
    chunks: &[Chunk],
) -> (Vec<GroupExtraction>, Vec<ValidationIssue>) {
    let mut issues = validate_extraction(groups, chunks);
    let mut cleaned = Vec::new();

    for group in groups {
        let keep = |words: &[String]| -> Vec<String> {
            let mut seen = Vec::new();
            let mut kept = Vec::new();
            for word in words {
                if find_occurrences(word, chunks).is_empty() {
                    continue; // already reported as NotVerbatim
                }
                let normalized = normalize_text(word);
                if seen.contains(&normalized) {
                    continue;
                }
                seen.push(normalized);
                kept.push(word.clone());
            }
            kept
        };
        let target_words = keep(&group.target_words);
        let attribute_words = keep(&group.attribute_words);

        if target_words.is_empty() || attribute_words.is_empty() {
            issues.push(ValidationIssue::error(
                IssueRule::EmptySet,
                format!(
                    "group {:?} dropped: no verbatim {} remain after cleaning",
                    group.group_name,
                    if target_words.is_empty() {
                        "target words"
                    } else {
                        "attribute words"
                    }
                ),
            ));
            continue;
        }
        cleaned.push(GroupExtraction {
            group_name: group.group_name.clone(),
            target_words,
            attribute_words,
        });
    }

    (cleaned, issues)
}

/// Two groups balanced into CEAT-ready paired word sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedSets {
    pub sets: StimulusWordSets,
    /// Words cut by equal-size truncation, for the report.
    pub truncated_words: Vec<String>,
}

/// Balances two admissible groups into equal-sized target and attribute
/// sets. Each list is ordered by its words' first occurrence in the
/// corpus (document, chunk, offset), then truncated to the shorter
/// side's length, so the words kept are the ones the corpus introduces
/// first. Applying this twice changes nothing.
pub fn balance_sets(g1: &GroupExtraction, g2: &GroupExtraction, chunks: &[Chunk]) -> BalancedSets {
    let order = |words: &[String]| -> Vec<String> {
        let mut keyed: Vec<(usize, (String, usize, usize), String)> = words
            .iter()
            .enumerate()
            .map(|(i, word)| {
                let key = find_occurrences(word, chunks)
                    .first()
                    .map(|o| (o.doc_id.clone(), o.chunk_index, o.span.0))
                    // absent words (inadmissible input) sort last, stably
                    .unwrap_or_else(|| (String::from("\u{10FFFF}"), usize::MAX, i));
                (i, key, word.clone())
            })
            .collect();
        keyed.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        keyed.into_iter().map(|(_, _, word)| word).collect()
    };

    let targets_1 = order(&g1.target_words);
    let targets_2 = order(&g2.target_words);
    let attributes_1 = order(&g1.attribute_words);
    let attributes_2 = order(&g2.attribute_words);

    let n_targets = targets_1.len().min(targets_2.len());
    let n_attributes = attributes_1.len().min(attributes_2.len());

    let mut truncated_words = Vec::new();
    let mut cut = |list: &[String], keep: usize| {
        truncated_words.extend(list[keep..].iter().cloned());
        list[..keep].to_vec()
    };

    BalancedSets {
        sets: StimulusWordSets {
            targets_x: cut(&targets_1, n_targets),
            targets_y: cut(&targets_2, n_targets),
            attributes_a: cut(&attributes_1, n_attributes),
            attributes_b: cut(&attributes_2, n_attributes),
        },
        truncated_words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{chunk as chunk_doc, ChunkPolicy, Document};

    fn chunks_of(text: &str) -> Vec<Chunk> {
        let doc = Document {
            id: "doc".to_string(),
            source_path: "doc.txt".to_string(),
            text: text.to_string(),
        };
        chunk_doc(&doc, ChunkPolicy::default()).unwrap()
    }

    fn group(name: &str, targets: &[&str], attributes: &[&str]) -> GroupExtraction {
        GroupExtraction {
            group_name: name.to_string(),
            target_words: targets.iter().map(|s| s.to_string()).collect(),
            attribute_words: attributes.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn fully_verbatim_extraction_has_no_issues() {
        let chunks = chunks_of("Carlos Ramirez is hardworking. Sarah Thompson is ambitious.");
        let groups = vec![
            group("Mexican", &["Carlos Ramirez"], &["hardworking"]),
            group("American", &["Sarah Thompson"], &["ambitious"]),
        ];
        assert!(validate_extraction(&groups, &chunks).is_empty());
    }

    #[test]
    fn absent_word_is_flagged_not_verbatim() {
        let chunks = chunks_of("Carlos Ramirez is hardworking.");
        let groups = vec![group(
            "Mexican",
            &["Carlos Ramirez"],
            &["hardworking-ness"],
        )];
        let issues = validate_extraction(&groups, &chunks);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].rule, IssueRule::NotVerbatim);
        assert_eq!(issues[0].severity, IssueSeverity::Error);
        assert!(issues[0].detail.contains("hardworking-ness"));
        assert!(issues[0].detail.contains("Mexican"));
    }

    #[test]
    fn empty_list_is_flagged() {
        let chunks = chunks_of("some text");
        let issues = validate_extraction(&[group("G", &[], &["text"])], &chunks);
        assert!(issues
            .iter()
            .any(|i| i.rule == IssueRule::EmptySet && i.detail.contains("target_words")));
    }

    #[test]
    fn duplicate_group_names_warn_case_insensitively() {
        let chunks = chunks_of("Mexican students and mexican families visited.");
        let groups = vec![
            group("Mexican", &["Mexican"], &["students"]),
            group("mexican", &["mexican"], &["families"]),
        ];
        let issues = validate_extraction(&groups, &chunks);
        let duplicates: Vec<_> = issues
            .iter()
            .filter(|i| i.rule == IssueRule::DuplicateGroup)
            .collect();
        assert_eq!(duplicates.len(), 1);
        assert_eq!(duplicates[0].severity, IssueSeverity::Warning);
    }

    #[test]
    fn cleaning_drops_only_offending_words() {
        let chunks = chunks_of("Carlos Ramirez is hardworking and family-oriented.");
        let groups = vec![group(
            "Mexican",
            &["Carlos Ramirez"],
            &["hardworking", "invented-trait", "family-oriented"],
        )];
        let (cleaned, issues) = clean_groups(&groups, &chunks);
        assert_eq!(cleaned.len(), 1);
        assert_eq!(
            cleaned[0].attribute_words,
            vec!["hardworking", "family-oriented"]
        );
        assert!(issues.iter().any(|i| i.rule == IssueRule::NotVerbatim));
    }

    #[test]
    fn cleaning_drops_group_when_all_targets_vanish() {
        let chunks = chunks_of("Only attributes like diligent appear here.");
        let groups = vec![
            group("Ghost", &["Nobody Name"], &["diligent"]),
            group("Real", &["attributes"], &["diligent"]),
        ];
        let (cleaned, issues) = clean_groups(&groups, &chunks);
        assert_eq!(cleaned.len(), 1);
        assert_eq!(cleaned[0].group_name, "Real");
        assert!(issues
            .iter()
            .any(|i| i.rule == IssueRule::EmptySet && i.detail.contains("Ghost")));
    }

    #[test]
    fn cleaning_deduplicates_within_lists() {
        let chunks = chunks_of("Ana is diligent. Diligent people thrive. ana thrives.");
        let groups = vec![group("G", &["Ana", "ana"], &["diligent", "Diligent"])];
        let (cleaned, _) = clean_groups(&groups, &chunks);
        assert_eq!(cleaned[0].target_words, vec!["Ana"]);
        assert_eq!(cleaned[0].attribute_words, vec!["diligent"]);
    }

    #[test]
    fn balance_keeps_equal_sizes_unchanged() {
        let chunks = chunks_of("Ana is kind. Ben is stern.");
        let g1 = group("A", &["Ana"], &["kind"]);
        let g2 = group("B", &["Ben"], &["stern"]);
        let balanced = balance_sets(&g1, &g2, &chunks);
        assert_eq!(balanced.sets.targets_x, vec!["Ana"]);
        assert_eq!(balanced.sets.targets_y, vec!["Ben"]);
        assert_eq!(balanced.sets.attributes_a, vec!["kind"]);
        assert_eq!(balanced.sets.attributes_b, vec!["stern"]);
        assert!(balanced.truncated_words.is_empty());
    }

    #[test]
    fn balance_truncates_six_against_five() {
        // one group carries six attributes, the other five; both sides
        // must come out at five
        let text = "Juan is warm, humble, loyal, patient, festive. \
                    Emma is driven, precise, frugal, candid, stoic, polished.";
        let chunks = chunks_of(text);
        let g1 = group(
            "First",
            &["Juan"],
            &["warm", "humble", "loyal", "patient", "festive"],
        );
        let g2 = group(
            "Second",
            &["Emma"],
            &["driven", "precise", "frugal", "candid", "stoic", "polished"],
        );
        let balanced = balance_sets(&g1, &g2, &chunks);
        assert_eq!(balanced.sets.attributes_a.len(), 5);
        assert_eq!(balanced.sets.attributes_b.len(), 5);
        assert_eq!(balanced.truncated_words, vec!["polished"]);
    }

    #[test]
    fn balance_orders_by_corpus_first_occurrence() {
        // corpus order deliberately disagrees with both list order and
        // alphabetical order
        let text = "zeal came first here, then banter, then apricot.";
        let chunks = chunks_of(text);
        let g1 = group("G1", &["came"], &["apricot", "banter", "zeal"]);
        let g2 = group("G2", &["then"], &["first", "here"]);
        let balanced = balance_sets(&g1, &g2, &chunks);
        // g1's attributes sorted by corpus position: zeal, banter, apricot
        assert_eq!(balanced.sets.attributes_a, vec!["zeal", "banter"]);
        assert_eq!(balanced.truncated_words, vec!["apricot"]);
    }

    #[test]
    fn balance_is_idempotent() {
        let text = "zeal came first here, then banter, then apricot. Emma and Juan spoke.";
        let chunks = chunks_of(text);
        let g1 = group("G1", &["Juan", "came"], &["apricot", "banter", "zeal"]);
        let g2 = group("G2", &["Emma"], &["first", "here"]);
        let once = balance_sets(&g1, &g2, &chunks);
        let rebalanced = balance_sets(
            &GroupExtraction {
                group_name: "G1".to_string(),
                target_words: once.sets.targets_x.clone(),
                attribute_words: once.sets.attributes_a.clone(),
            },
            &GroupExtraction {
                group_name: "G2".to_string(),
                target_words: once.sets.targets_y.clone(),
                attribute_words: once.sets.attributes_b.clone(),
            },
            &chunks,
        );
        assert_eq!(once.sets, rebalanced.sets);
        assert!(rebalanced.truncated_words.is_empty());
    }
}
