//! Turns a merged [`RunConfig`](crate::config::RunConfig) into live
//! objects: corpora as chunk lists, the embedding service, and the LLM
//! client. All validation that would otherwise panic deep in a module
//! happens here, with messages that name the config key to fix.

use std::path::Path;

use anyhow::{bail, Context};
use ceat_core::corpus::{chunk, load_corpus, Chunk};
use ceat_core::embedding::{
    DiskCache, EmbeddingService, HttpEmbeddingProvider, LocalProvider, ProviderConfig,
};
use ceat_core::extraction::{HttpLlmClient, LlmClient, LlmConfig, RecordingClient, ReplayClient};

use crate::config::{EmbeddingProviderKind, LlmMode, RunConfig};

/// One corpus ready for scoring: its report id and its chunks.
pub struct Corpus {
    pub id: String,
    pub chunks: Vec<Chunk>,
}

fn corpus_id(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Loads every configured corpus path as its own corpus. A path may be a
/// single text file or a directory of them; the corpus id is the stem.
pub fn load_corpora(config: &RunConfig) -> anyhow::Result<Vec<Corpus>> {
    if config.corpus.is_empty() {
        bail!("no corpus given: pass --corpus <path> or set `corpus` in the config file");
    }
    let mut corpora = Vec::with_capacity(config.corpus.len());
    for path in &config.corpus {
        let documents = load_corpus(std::slice::from_ref(path))
            .with_context(|| format!("cannot load corpus {}", path.display()))?;
        let mut chunks = Vec::new();
        for document in &documents {
            chunks.extend(
                chunk(document, config.chunk_policy)
                    .with_context(|| format!("cannot chunk {}", document.source_path))?,
            );
        }
        let mut id = corpus_id(path);
        let mut suffix = 2;
        while corpora.iter().any(|c: &Corpus| c.id == id) {
            id = format!("{}-{suffix}", corpus_id(path));
            suffix += 1;
        }
        corpora.push(Corpus { id, chunks });
    }
    Ok(corpora)
}

/// The embedding service plus what a report should say about it.
pub struct EmbeddingRuntime {
    pub service: EmbeddingService,
    pub provider_kind: EmbeddingProviderKind,
    pub model_id: String,
}

pub fn build_embedding_service(config: &RunConfig) -> anyhow::Result<EmbeddingRuntime> {
    let cache = match &config.cache_dir {
        Some(dir) => Some(
            DiskCache::new(dir)
                .with_context(|| format!("cannot open embedding cache in {}", dir.display()))?,
        ),
        None => None,
    };

    let settings = &config.embedding;
    match settings.provider {
        EmbeddingProviderKind::Local => {
            // the id encodes dimension and seed so cached vectors from
            // different local configurations never collide
            let model_id = format!(
                "local-d{}-s{}",
                settings.dimension, settings.local_seed
            );
            let provider = LocalProvider::new(settings.dimension, settings.local_seed);
            Ok(EmbeddingRuntime {
                service: EmbeddingService::new(Box::new(provider), &model_id, cache),
                provider_kind: EmbeddingProviderKind::Local,
                model_id,
            })
        }
        EmbeddingProviderKind::Http => {
            let endpoint = settings.endpoint.as_deref().ok_or_else(|| {
                anyhow::anyhow!(
                    "embedding provider \"http\" needs an endpoint: \
                     pass --embedding-endpoint or set [embedding].endpoint"
                )
            })?;
            let model = settings.model.as_deref().ok_or_else(|| {
                anyhow::anyhow!(
                    "embedding provider \"http\" needs a model id: \
                     pass --embedding-model or set [embedding].model"
                )
            })?;
            let provider_config =
                ProviderConfig::new(endpoint, model, settings.api_key_env.clone());
            let provider = HttpEmbeddingProvider::new(provider_config)
                .context("invalid embedding provider configuration")?;
            Ok(EmbeddingRuntime {
                service: EmbeddingService::new(Box::new(provider), model, cache),
                provider_kind: EmbeddingProviderKind::Http,
                model_id: model.to_string(),
            })
        }
    }
}

/// The LLM client plus what a report should say about it.
pub struct LlmRuntime {
    pub client: Box<dyn LlmClient>,
    pub mode: LlmMode,
    pub model_id: String,
}

pub fn build_llm_client(config: &RunConfig) -> anyhow::Result<LlmRuntime> {
    let settings = &config.llm;
    let live_client = || -> anyhow::Result<HttpLlmClient> {
        let endpoint = settings.endpoint.as_deref().ok_or_else(|| {
            anyhow::anyhow!(
                "llm mode \"{}\" needs an endpoint: pass --llm-endpoint or set [llm].endpoint",
                settings.mode.as_str()
            )
        })?;
        let model = settings.model.as_deref().ok_or_else(|| {
            anyhow::anyhow!(
                "llm mode \"{}\" needs a model id: pass --llm-model or set [llm].model",
                settings.mode.as_str()
            )
        })?;
        HttpLlmClient::new(LlmConfig::new(endpoint, model, settings.api_key_env.clone()))
            .context("invalid llm configuration")
    };
    let replay_store = || -> anyhow::Result<&Path> {
        settings.replay_dir.as_deref().ok_or_else(|| {
            anyhow::anyhow!(
                "llm mode \"{}\" needs a store: pass --replay-dir or set [llm].replay_dir",
                settings.mode.as_str()
            )
        })
    };

    let client: Box<dyn LlmClient> = match settings.mode {
        LlmMode::Live => Box::new(live_client()?),
        LlmMode::Record => Box::new(RecordingClient::new(live_client()?, replay_store()?)),
        LlmMode::Replay => Box::new(ReplayClient::new(replay_store()?)),
    };
    let model_id = settings
        .model
        .clone()
        .unwrap_or_else(|| format!("{}-store", settings.mode.as_str()));
    Ok(LlmRuntime {
        client,
        mode: settings.mode,
        model_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CommonArgs;

    fn config_with(f: impl FnOnce(&mut RunConfig)) -> RunConfig {
        let args = CommonArgs {
            config: None,
            corpus: vec![],
            seed: None,
            samples: None,
            format: None,
            out: None,
            cache_dir: None,
            embedding_provider: None,
            embedding_endpoint: None,
            embedding_model: None,
            llm_endpoint: None,
            llm_model: None,
            llm_mode: None,
            replay_dir: None,
        };
        let mut config = RunConfig::from_args(&args).unwrap();
        f(&mut config);
        config
    }

    #[test]
    fn corpora_load_per_path_with_stem_ids() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("course-1.txt");
        let b = dir.path().join("course-2.txt");
        std::fs::write(&a, "Alpha text about one course.").unwrap();
        std::fs::write(&b, "Beta text about another course.").unwrap();

        let config = config_with(|c| c.corpus = vec![a.clone(), b.clone()]);
        let corpora = load_corpora(&config).unwrap();
        assert_eq!(corpora.len(), 2);
        assert_eq!(corpora[0].id, "course-1");
        assert_eq!(corpora[1].id, "course-2");
        assert!(!corpora[0].chunks.is_empty());
    }

    #[test]
    fn duplicate_corpus_stems_get_suffixes() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("sub");
        std::fs::create_dir(&sub).unwrap();
        let a = dir.path().join("text.txt");
        let b = sub.join("text.txt");
        std::fs::write(&a, "First body.").unwrap();
        std::fs::write(&b, "Second body.").unwrap();

        let config = config_with(|c| c.corpus = vec![a, b]);
        let corpora = load_corpora(&config).unwrap();
        assert_eq!(corpora[0].id, "text");
        assert_eq!(corpora[1].id, "text-2");
    }

    #[test]
    fn missing_corpus_path_names_the_path() {
        let config = config_with(|c| c.corpus = vec!["/definitely/not/here.txt".into()]);
        let err = load_corpora(&config).err().unwrap();
        assert!(format!("{err:#}").contains("/definitely/not/here.txt"));
    }

    #[test]
    fn empty_corpus_list_is_an_error() {
        let err = load_corpora(&config_with(|_| {})).err().unwrap();
        assert!(err.to_string().contains("--corpus"));
    }

    #[test]
    fn local_embedding_service_needs_no_secrets() {
        let runtime = build_embedding_service(&config_with(|_| {})).unwrap();
        assert_eq!(runtime.provider_kind, EmbeddingProviderKind::Local);
        assert_eq!(runtime.model_id, "local-d256-s0");
        assert!(runtime.service.embed_in_context("anything", None).is_ok());
    }

    #[test]
    fn http_embedding_without_endpoint_is_a_config_error() {
        let config = config_with(|c| {
            c.embedding.provider = EmbeddingProviderKind::Http;
        });
        let err = build_embedding_service(&config).err().unwrap();
        assert!(err.to_string().contains("--embedding-endpoint"));
    }

    #[test]
    fn replay_llm_without_store_is_a_config_error() {
        let config = config_with(|c| c.llm.mode = LlmMode::Replay);
        let err = build_llm_client(&config).err().unwrap();
        assert!(err.to_string().contains("--replay-dir"));
    }

    #[test]
    fn live_llm_without_endpoint_is_a_config_error() {
        let err = build_llm_client(&config_with(|_| {})).err().unwrap();
        assert!(err.to_string().contains("--llm-endpoint"));
    }
}
