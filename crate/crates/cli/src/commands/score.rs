//! `ceat score`: score each corpus against a word-set file and write the
//! per-pair and per-text results.

use std::path::Path;

use anyhow::Context;
use ceat_core::evaluation::{score_text, TextScore};
use serde::Serialize;

use super::{canonical, read_word_sets, write_output};
use crate::config::RunConfig;
use crate::runtime::{build_embedding_service, load_corpora};

#[derive(Serialize)]
struct ScoresDocument<'a> {
    scores: &'a [TextScore],
}

pub fn run(config: &RunConfig, wordsets: &Path) -> anyhow::Result<()> {
    let file = read_word_sets(wordsets)?;
    let corpora = load_corpora(config)?;
    let embedding = build_embedding_service(config)?;

    let mut scores = Vec::with_capacity(corpora.len());
    for corpus in &corpora {
        let (score, truncation_notes) = score_text(
            &corpus.id,
            &corpus.chunks,
            &file.groups,
            &embedding.service,
            config.samples,
            config.seed,
        )
        .with_context(|| format!("cannot score corpus {}", corpus.id))?;
        for note in truncation_notes {
            log::warn!("corpus {}: {note}", corpus.id);
        }
        scores.push(score);
    }

    write_output(&config.out, &canonical(&ScoresDocument { scores: &scores })?)
}
