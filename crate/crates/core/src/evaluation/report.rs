//! Audit report assembly and rendering.
//!
//! The JSON form is canonical — sorted keys, floats at six decimal
//! places, no trailing zeros games — so identical runs produce identical
//! bytes and goldens can be compared with plain `diff`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{EvaluationError, ScoreDelta, TextScore, WordSetComparison};
use crate::extraction::ValidationIssue;
use crate::stats::CorrelationResult;

/// Output format for rendered reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

/// The run configuration a report must echo so the run can be
/// regenerated from the report alone (plus the input files).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub n_samples: usize,
    pub embedding_provider: String,
    pub embedding_model: String,
    pub llm_model: Option<String>,
    pub llm_mode: Option<String>,
    pub chunk_max_chars: usize,
    pub chunk_overlap_chars: usize,
    pub retrieval_k: Option<usize>,
}

/// Everything one audit (or evaluation) run produced.
///
/// `text_scores` is keyed by variant — `"ground_truth"` and/or
/// `"extracted"` — each holding one entry per scored corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub tool_version: String,
    pub configuration: ConfigEcho,
    pub text_scores: BTreeMap<String, Vec<TextScore>>,
    pub word_set_comparisons: Vec<WordSetComparison>,
    pub pearson: Option<CorrelationResult>,
    pub score_deltas: Vec<ScoreDelta>,
    pub validation_issues: Vec<ValidationIssue>,
    pub notes: Vec<String>,
}

impl AuditReport {
    /// Rejects non-finite numbers up front: `serde_json` would silently
    /// turn a NaN into `null`, corrupting the report instead of failing.
    fn validate_finite(&self) -> Result<(), EvaluationError> {
        let check = |value: f64, field: String| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(EvaluationError::NonFiniteInReport { field })
            }
        };
        for (variant, scores) in &self.text_scores {
            for score in scores {
                check(
                    score.text_score,
                    format!("text_scores.{variant}.{}.text_score", score.corpus_id),
                )?;
                for pair in &score.pair_scores {
                    check(
                        pair.ces,
                        format!(
                            "text_scores.{variant}.{}.({}, {}).ces",
                            score.corpus_id, pair.group_pair.0, pair.group_pair.1
                        ),
                    )?;
                }
            }
        }
        for comparison in &self.word_set_comparisons {
            let base = format!("word_set_comparisons.{}", comparison.group_name);
            check(comparison.similarity, format!("{base}.similarity"))?;
            if let Some(value) = comparison.similarity_targets {
                check(value, format!("{base}.similarity_targets"))?;
            }
            if let Some(value) = comparison.similarity_attributes {
                check(value, format!("{base}.similarity_attributes"))?;
            }
        }
        if let Some(pearson) = &self.pearson {
            check(pearson.r, "pearson.r".to_string())?;
        }
        for delta in &self.score_deltas {
            let base = format!("score_deltas.{}", delta.corpus_id);
            check(delta.gt_score, format!("{base}.gt_score"))?;
            check(delta.extracted_score, format!("{base}.extracted_score"))?;
            check(delta.delta, format!("{base}.delta"))?;
        }
        Ok(())
    }
}

/// Renders a report in the requested format. Both forms end with a
/// newline and are byte-deterministic for equal reports.
pub fn render_report(
    report: &AuditReport,
    format: ReportFormat,
) -> Result<String, EvaluationError> {
    report.validate_finite()?;
    match format {
        ReportFormat::Json => {
            let value = serde_json::to_value(report)
                .expect("a finite report serializes to a JSON value");
            let mut out = canonical_json(&value);
            out.push('\n');
            Ok(out)
        }
        ReportFormat::Markdown => Ok(render_markdown(report)),
    }
}

/// Serializes a JSON value canonically: object keys sorted, two-space
/// indent, floats at exactly six decimal places with negative zero
/// normalized, integers left as integers.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(number) => write_number(number, out),
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push_str(": ");
                write_value(&map[key.as_str()], indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn write_number(number: &serde_json::Number, out: &mut String) {
    if let Some(value) = number.as_u64() {
        out.push_str(&value.to_string());
    } else if let Some(value) = number.as_i64() {
        out.push_str(&value.to_string());
    } else {
        let value = number.as_f64().expect("JSON numbers are u64, i64, or f64");
        let formatted = format!("{value:.6}");
        // -0.000000 (true negative zero or a tiny negative rounded down)
        // must not differ from zero in canonical output
        if formatted == "-0.000000" {
            out.push_str("0.000000");
        } else {
            out.push_str(&formatted);
        }
    }
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn fmt6(value: f64) -> String {
    let formatted = format!("{value:.6}");
    if formatted == "-0.000000" {
        "0.000000".to_string()
    } else {
        formatted
    }
}

fn render_markdown(report: &AuditReport) -> String {
    let mut out = String::new();
    out.push_str("# Corpus bias audit\n\n");

    let config = &report.configuration;
    out.push_str("## Configuration\n\n");
    out.push_str(&format!("- tool version: {}\n", report.tool_version));
    out.push_str(&format!("- seed: {}\n", config.seed));
    out.push_str(&format!("- samples per pair: {}\n", config.n_samples));
    out.push_str(&format!(
        "- embedding provider: {} (model {})\n",
        config.embedding_provider, config.embedding_model
    ));
    if let Some(model) = &config.llm_model {
        let mode = config.llm_mode.as_deref().unwrap_or("live");
        out.push_str(&format!("- llm: {model} ({mode})\n"));
    }
    out.push_str(&format!(
        "- chunking: max {} chars, overlap {}\n",
        config.chunk_max_chars, config.chunk_overlap_chars
    ));
    if let Some(k) = config.retrieval_k {
        out.push_str(&format!("- retrieval depth: {k}\n"));
    }

    for (variant, scores) in &report.text_scores {
        out.push_str(&format!("\n## Text scores — {variant}\n\n"));
        out.push_str("| corpus | text score |\n|---|---|\n");
        for score in scores {
            out.push_str(&format!(
                "| {} | {} |\n",
                score.corpus_id,
                fmt6(score.text_score)
            ));
        }
        for score in scores {
            out.push_str(&format!("\n### Pairs — {}\n\n", score.corpus_id));
            out.push_str(
                "| group pair | combined effect size | magnitude | samples | fallback words |\n\
                 |---|---|---|---|---|\n",
            );
            for pair in &score.pair_scores {
                out.push_str(&format!(
                    "| {} vs {} | {} | {} | {} | {} |\n",
                    pair.group_pair.0,
                    pair.group_pair.1,
                    fmt6(pair.ces),
                    pair.magnitude,
                    pair.n_samples,
                    if pair.fallback_words.is_empty() {
                        "—".to_string()
                    } else {
                        pair.fallback_words.join(", ")
                    }
                ));
            }
        }
    }

    if !report.word_set_comparisons.is_empty() {
        out.push_str("\n## Word-set alignment\n\n");
        out.push_str(
            "| group | similarity | targets | attributes |\n|---|---|---|---|\n",
        );
        for comparison in &report.word_set_comparisons {
            let optional = |value: Option<f64>| match value {
                Some(v) => fmt6(v),
                None => "—".to_string(),
            };
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                comparison.group_name,
                fmt6(comparison.similarity),
                optional(comparison.similarity_targets),
                optional(comparison.similarity_attributes),
            ));
        }
    }

    if report.pearson.is_some() || !report.score_deltas.is_empty() {
        out.push_str("\n## Score comparison\n\n");
        if let Some(pearson) = &report.pearson {
            out.push_str(&format!(
                "Pearson r = {} over {} texts.\n\n",
                fmt6(pearson.r),
                pearson.n_points
            ));
        }
        if !report.score_deltas.is_empty() {
            out.push_str(
                "| corpus | ground truth | extracted | deviation |\n|---|---|---|---|\n",
            );
            for delta in &report.score_deltas {
                out.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    delta.corpus_id,
                    fmt6(delta.gt_score),
                    fmt6(delta.extracted_score),
                    fmt6(delta.delta),
                ));
            }
        }
    }

    if !report.validation_issues.is_empty() {
        out.push_str("\n## Validation issues\n\n");
        for issue in &report.validation_issues {
            out.push_str(&format!("- {issue}\n"));
        }
    }

    if !report.notes.is_empty() {
        out.push_str("\n## Notes\n\n");
        for note in &report.notes {
            out.push_str(&format!("- {note}\n"));
        }
    }

    out
}
