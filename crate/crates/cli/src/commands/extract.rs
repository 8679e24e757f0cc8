//! `ceat extract`: run the retrieval-augmented LLM extraction over the
//! corpus and write the word-set file.

use ceat_core::corpus::Chunk;
use ceat_core::extraction::{run_extraction, ExtractionPipeline, PromptTemplate};

use super::{canonical, write_output};
use crate::config::{LlmMode, RunConfig};
use crate::runtime::{build_embedding_service, build_llm_client, load_corpora};

pub fn run(config: &RunConfig) -> anyhow::Result<()> {
    let corpora = load_corpora(config)?;
    // one extraction over everything the command was pointed at
    let chunks: Vec<Chunk> = corpora.into_iter().flat_map(|c| c.chunks).collect();

    let embedding = build_embedding_service(config)?;
    let llm = build_llm_client(config)?;
    let template = PromptTemplate::default();

    let pipeline = ExtractionPipeline {
        chunks: &chunks,
        template: &template,
        llm: llm.client.as_ref(),
        llm_model_id: &llm.model_id,
        embeddings: &embedding.service,
        top_k: config.llm.retrieval_k,
        // replayed runs must stay byte-identical across time
        stamp_time: llm.mode != LlmMode::Replay,
    };
    let result = run_extraction(&pipeline)?;

    for issue in &result.validation_issues {
        log::warn!("{issue}");
    }
    write_output(&config.out, &canonical(&result)?)
}
