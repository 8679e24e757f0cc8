//! Prompt assembly for word-set extraction.
//!
//! A [`PromptTemplate`] renders to a single self-contained prompt: task
//! definition, few-shot examples (one per bias category), the extraction
//! constraints, the output schema, and finally the retrieved corpus
//! excerpts with document/chunk markers. Rendering is a pure function of
//! its inputs, so identical inputs always produce byte-identical prompts
//! (and therefore identical prompt hashes for the replay store).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::parse::parse_extraction;
use super::ExtractionError;
use crate::corpus::Chunk;
use crate::embedding::hex_digest;

/// Bias category a few-shot example or probe query addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasCategory {
    Gender,
    National,
    Racial,
}

impl BiasCategory {
    pub const ALL: [BiasCategory; 3] = [
        BiasCategory::Gender,
        BiasCategory::National,
        BiasCategory::Racial,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BiasCategory::Gender => "gender",
            BiasCategory::National => "national",
            BiasCategory::Racial => "racial",
        }
    }
}

impl std::fmt::Display for BiasCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One worked example shown to the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FewShotExample {
    pub input_excerpt: String,
    /// JSON text in the same schema the live model must produce.
    pub expected_output: String,
    pub bias_category: BiasCategory,
}

/// The pieces of an extraction prompt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task_definition: String,
    pub few_shot_examples: Vec<FewShotExample>,
    pub constraints_block: String,
    pub output_schema_block: String,
}

impl PromptTemplate {
    /// Checks the template invariants: every example output parses under
    /// the live output schema, and the examples cover the gender,
    /// national, and racial categories.
    pub fn validate(&self) -> Result<(), ExtractionError> {
        for (i, example) in self.few_shot_examples.iter().enumerate() {
            parse_extraction(&example.expected_output).map_err(|e| {
                ExtractionError::InvalidTemplate {
                    detail: format!("few-shot example {} output does not parse: {e}", i + 1),
                }
            })?;
        }
        for category in BiasCategory::ALL {
            if !self
                .few_shot_examples
                .iter()
                .any(|e| e.bias_category == category)
            {
                return Err(ExtractionError::InvalidTemplate {
                    detail: format!("no few-shot example covers the {category} bias category"),
                });
            }
        }
        Ok(())
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        let gender_example = FewShotExample {
            input_excerpt: "Mr. Harris told the class that engineering demands logic and \
                            stamina, which is why the boys gravitate to it, while the girls, \
                            being naturally patient and nurturing, would do well in nursing."
                .to_string(),
            expected_output: r#"{"groups": [
  {"name": "boys", "target_words": ["boys"], "attribute_words": ["logic", "stamina"]},
  {"name": "girls", "target_words": ["girls"], "attribute_words": ["patient", "nurturing"]}
]}"#
            .to_string(),
            bias_category: BiasCategory::Gender,
        };
        let national_example = FewShotExample {
            input_excerpt: "The brochure praised German engineers for their precision and \
                            discipline, and described Italian designers as creative but \
                            disorganized."
                .to_string(),
            expected_output: r#"{"groups": [
  {"name": "German", "target_words": ["German engineers"], "attribute_words": ["precision", "discipline"]},
  {"name": "Italian", "target_words": ["Italian designers"], "attribute_words": ["creative", "disorganized"]}
]}"#
            .to_string(),
            bias_category: BiasCategory::National,
        };
        let racial_example = FewShotExample {
            input_excerpt: "The novel's narrator calls the Black neighborhood lively yet \
                            dangerous, while the white suburb is described as orderly and \
                            safe."
                .to_string(),
            expected_output: r#"{"groups": [
  {"name": "Black", "target_words": ["Black neighborhood"], "attribute_words": ["lively", "dangerous"]},
  {"name": "white", "target_words": ["white suburb"], "attribute_words": ["orderly", "safe"]}
]}"#
            .to_string(),
            bias_category: BiasCategory::Racial,
        };

        Self {
            task_definition: "You are auditing a text corpus for social bias. Read the corpus \
                              excerpts below and identify every demographic group the text \
                              describes. For each group, extract target words (names or phrases \
                              that refer to members of the group) and attribute words (the \
                              qualities, traits, roles, or expectations the text associates \
                              with that group)."
                .to_string(),
            constraints_block: "- Extract only words and phrases that appear verbatim in the \
                                excerpts; do not infer, paraphrase, or invent terms.\n\
                                - Extraction must be exhaustive: cover every described group \
                                and every associated attribute, not just the most prominent \
                                ones.\n\
                                - Preserve the accurate representation of text formatting: \
                                keep capitalization, hyphenation, and spacing exactly as \
                                written in the excerpt.\n\
                                - Omit any group that has no attributed qualities."
                .to_string(),
            output_schema_block: "Respond with a single JSON object and nothing else, in \
                                  exactly this shape:\n\
                                  {\"groups\": [{\"name\": \"<group label>\", \
                                  \"target_words\": [\"<verbatim phrase>\"], \
                                  \"attribute_words\": [\"<verbatim phrase>\"]}]}"
                .to_string(),
            few_shot_examples: vec![gender_example, national_example, racial_example],
        }
    }
}

/// Renders the full prompt. `retrieved` must be non-empty — an extraction
/// over zero excerpts is a pipeline bug upstream, not a model question.
pub fn build_prompt(template: &PromptTemplate, retrieved: &[Chunk]) -> String {
    assert!(
        !retrieved.is_empty(),
        "build_prompt requires at least one retrieved chunk"
    );
    let mut prompt = String::new();
    prompt.push_str(&template.task_definition);
    prompt.push_str("\n\n## Examples\n");
    for (i, example) in template.few_shot_examples.iter().enumerate() {
        prompt.push_str(&format!(
            "\n### Example {} ({} bias)\nInput:\n{}\nOutput:\n{}\n",
            i + 1,
            example.bias_category,
            example.input_excerpt,
            example.expected_output
        ));
    }
    prompt.push_str("\n## Constraints\n\n");
    prompt.push_str(&template.constraints_block);
    prompt.push_str("\n\n## Output format\n\n");
    prompt.push_str(&template.output_schema_block);
    prompt.push_str("\n\n## Corpus excerpts\n");
    for chunk in retrieved {
        prompt.push_str(&format!(
            "\n--- document: {} | chunk: {} ---\n{}\n",
            chunk.doc_id, chunk.index, chunk.text
        ));
    }
    prompt
}

/// Stable hash of a rendered prompt; the replay store is keyed by it.
pub fn prompt_hash(prompt: &str) -> String {
    hex_digest(&Sha256::digest(prompt.as_bytes()))
}

/// Fixed library of retrieval probes, one per bias category. Retrieval
/// ranks chunks against these descriptions of biased language rather than
/// against the (much longer) task prompt.
pub fn bias_probe_queries() -> Vec<(BiasCategory, &'static str)> {
    vec![
        (
            BiasCategory::Gender,
            "men and women, boys and girls, described with different traits, roles, \
             abilities, and expectations",
        ),
        (
            BiasCategory::National,
            "people of different nationalities or countries described with contrasting \
             qualities, habits, and achievements",
        ),
        (
            BiasCategory::Racial,
            "people of different races, ethnicities, or communities described with \
             contrasting characteristics and stereotypes",
        ),
    ]
}
