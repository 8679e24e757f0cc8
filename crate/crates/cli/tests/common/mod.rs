//! Shared helpers for the CLI integration suites: fixture paths, binary
//! invocation with a scrubbed environment, and replay-store priming.
//! Each suite uses its own subset of these.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use ceat_core::corpus::{chunk, load_corpus, Chunk, ChunkPolicy};
use ceat_core::embedding::{EmbeddingService, LocalProvider};
use ceat_core::extraction::{
    run_extraction, ExtractionError, ExtractionPipeline, ExtractionResult, LlmClient,
    PromptTemplate, RecordingClient, DEFAULT_RETRIEVAL_K,
};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// The binary under test, with a network-hostile environment: API keys
/// removed and proxies pointed at a closed local port, so an accidental
/// network attempt fails fast instead of dialing out.
pub fn ceat() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ceat"));
    cmd.env_remove("CEAT_EMBEDDING_API_KEY")
        .env_remove("CEAT_LLM_API_KEY")
        .env("http_proxy", "http://127.0.0.1:9")
        .env("https_proxy", "http://127.0.0.1:9")
        .env("HTTP_PROXY", "http://127.0.0.1:9")
        .env("HTTPS_PROXY", "http://127.0.0.1:9");
    cmd
}

/// Runs the binary and returns (exit code, stdout, stderr), panicking on
/// signals so a crash never reads as a clean failure code.
pub fn run_ceat(args: &[&str]) -> (i32, String, String) {
    let output = ceat().args(args).output().expect("binary runs");
    let code = output.status.code().unwrap_or_else(|| {
        panic!(
            "binary killed by signal; stderr:\n{}",
            String::from_utf8_lossy(&output.stderr)
        )
    });
    (
        code,
        String::from_utf8(output.stdout).expect("stdout is UTF-8"),
        String::from_utf8(output.stderr).expect("stderr is UTF-8"),
    )
}

/// An LLM double that gives the same answer to every prompt.
struct Canned(String);

impl LlmClient for Canned {
    fn complete(&self, _prompt: &str) -> Result<String, ExtractionError> {
        Ok(self.0.clone())
    }
}

/// Primes `store` with `response` for the prompt the CLI will build over
/// `corpus_paths`, by running the same extraction pipeline the CLI runs
/// (default chunking, retrieval depth, prompt template, and the 256-d
/// seed-0 local embedding provider the fixture configs use) through a
/// recording client. The pipeline outcome is returned so callers can
/// assert on it — or ignore it, when the response is deliberately bad.
pub fn prime_replay_store(
    store: &Path,
    corpus_paths: &[PathBuf],
    response: &str,
) -> Result<ExtractionResult, ExtractionError> {
    let documents = load_corpus(corpus_paths).expect("fixture corpus loads");
    let mut chunks: Vec<Chunk> = Vec::new();
    for document in &documents {
        chunks.extend(chunk(document, ChunkPolicy::default()).expect("fixture corpus chunks"));
    }
    let embeddings =
        EmbeddingService::new(Box::new(LocalProvider::new(256, 0)), "local-d256-s0", None);
    let recorder = RecordingClient::new(Canned(response.to_string()), store);
    let template = PromptTemplate::default();
    run_extraction(&ExtractionPipeline {
        chunks: &chunks,
        template: &template,
        llm: &recorder,
        llm_model_id: "recorded-tutor-model",
        embeddings: &embeddings,
        top_k: DEFAULT_RETRIEVAL_K,
        stamp_time: false,
    })
}
