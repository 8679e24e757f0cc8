//! Parsing model output into group extractions.
//!
//! Strict schema, lenient envelope: the payload must be a single JSON
//! object of the agreed shape, but it may arrive wrapped in prose or a
//! fenced code block, because production models add both. The parser
//! lifts the first JSON object out of the response and maps it by hand so
//! schema errors can name the offending group.

use super::{ExtractionError, GroupExtraction};

/// Parses a raw model response into groups.
///
/// Schema: `{"groups": [{"name": ..., "target_words": [...],
/// "attribute_words": [...]}]}`. Empty word lists are tolerated here —
/// validation flags them — but missing or mistyped fields are not.
pub fn parse_extraction(raw: &str) -> Result<Vec<GroupExtraction>, ExtractionError> {
    let fragment = first_json_object(raw).ok_or_else(|| ExtractionError::SchemaViolation {
        detail: format!(
            "no JSON object found in response: {}",
            truncate_for_error(raw)
        ),
    })?;
    let value: serde_json::Value =
        serde_json::from_str(fragment).map_err(|e| ExtractionError::SchemaViolation {
            detail: format!("{e} in fragment: {}", truncate_for_error(fragment)),
        })?;

    let groups = value
        .get("groups")
        .and_then(|g| g.as_array())
        .ok_or_else(|| ExtractionError::SchemaViolation {
            detail: "top-level object has no \"groups\" array".to_string(),
        })?;

    groups
        .iter()
        .enumerate()
        .map(|(i, group)| parse_group(group, i))
        .collect()
}

fn parse_group(group: &serde_json::Value, index: usize) -> Result<GroupExtraction, ExtractionError> {
    let label = group
        .get("name")
        .and_then(|n| n.as_str())
        .map(str::to_string);
    let describe = || {
        label
            .clone()
            .map(|n| format!("group {n:?}"))
            .unwrap_or_else(|| format!("group at index {index}"))
    };

    let group_name = label.clone().ok_or_else(|| ExtractionError::SchemaViolation {
        detail: format!("{} is missing a string \"name\"", describe()),
    })?;
    let target_words = string_list(group, "target_words", &describe)?;
    let attribute_words = string_list(group, "attribute_words", &describe)?;
    Ok(GroupExtraction {
        group_name,
        target_words,
        attribute_words,
    })
}

fn string_list(
    group: &serde_json::Value,
    field: &str,
    describe: &dyn Fn() -> String,
) -> Result<Vec<String>, ExtractionError> {
    let array = group
        .get(field)
        .and_then(|v| v.as_array())
        .ok_or_else(|| ExtractionError::SchemaViolation {
            detail: format!("{} is missing an array \"{field}\"", describe()),
        })?;
    array
        .iter()
        .map(|entry| {
            entry
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| ExtractionError::SchemaViolation {
                    detail: format!(
                        "{} has a non-string entry in \"{field}\": {entry}",
                        describe()
                    ),
                })
        })
        .collect()
}

/// Returns the first balanced `{...}` object in the text, respecting JSON
/// string escapes so braces inside strings don't fool the scanner.
fn first_json_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + offset + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

fn truncate_for_error(text: &str) -> String {
    const LIMIT: usize = 160;
    let trimmed = text.trim();
    if trimmed.chars().count() <= LIMIT {
        trimmed.to_string()
    } else {
        let head: String = trimmed.chars().take(LIMIT).collect();
        format!("{head}…")
    }
}
