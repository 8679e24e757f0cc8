//! Run configuration: built-in defaults, overlaid by an optional TOML
//! file, overlaid by command-line flags. The merged result is echoed into
//! every report so a run can be reproduced from its output.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ceat_core::corpus::ChunkPolicy;
use ceat_core::evaluation::ReportFormat;
use ceat_core::extraction::DEFAULT_RETRIEVAL_K;
use serde::Deserialize;

use crate::CommonArgs;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_LOCAL_DIMENSION: usize = 256;
pub const DEFAULT_EMBEDDING_KEY_ENV: &str = "CEAT_EMBEDDING_API_KEY";
pub const DEFAULT_LLM_KEY_ENV: &str = "CEAT_LLM_API_KEY";

/// How stimulus words get their vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingProviderKind {
    /// Seeded hash-based vectors, fully offline and deterministic.
    Local,
    /// A remote embeddings endpoint.
    Http,
}

impl EmbeddingProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Local => "local",
            Self::Http => "http",
        }
    }
}

/// Where LLM completions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlmMode {
    Live,
    /// Live, but every completion is also written to the replay store.
    Record,
    /// Completions come from the replay store only; no network.
    Replay,
}

impl LlmMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Live => "live",
            Self::Record => "record",
            Self::Replay => "replay",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingSettings {
    pub provider: EmbeddingProviderKind,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key_env: String,
    pub dimension: usize,
    pub local_seed: u64,
}

#[derive(Debug, Clone)]
pub struct LlmSettings {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key_env: String,
    pub mode: LlmMode,
    pub replay_dir: Option<PathBuf>,
    pub retrieval_k: usize,
}

/// The fully merged configuration a command runs with.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub chunk_policy: ChunkPolicy,
    pub embedding: EmbeddingSettings,
    pub llm: LlmSettings,
}

// ---------------------------------------------------------------------------
// TOML file schema — everything optional, unknown keys rejected so typos
// fail loudly instead of silently falling back to defaults
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    corpus: Option<Vec<PathBuf>>,
    seed: Option<u64>,
    samples: Option<usize>,
    format: Option<String>,
    out: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    chunking: Option<ChunkingSection>,
    embedding: Option<EmbeddingSection>,
    llm: Option<LlmSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChunkingSection {
    max_chars: Option<usize>,
    overlap_chars: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingSection {
    provider: Option<String>,
    endpoint: Option<String>,
    model: Option<String>,
    /// Name of the environment variable holding the API key. Only the
    /// name lives in configuration; the key itself never does.
    api_key_env: Option<String>,
    dimension: Option<usize>,
    local_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LlmSection {
    endpoint: Option<String>,
    model: Option<String>,
    api_key_env: Option<String>,
    mode: Option<String>,
    replay_dir: Option<PathBuf>,
    retrieval_k: Option<usize>,
}

// ---------------------------------------------------------------------------
// merging
// ---------------------------------------------------------------------------

pub fn parse_format(value: &str) -> anyhow::Result<ReportFormat> {
    match value {
        "json" => Ok(ReportFormat::Json),
        "md" | "markdown" => Ok(ReportFormat::Markdown),
        other => bail!("unknown report format {other:?}: expected \"json\" or \"md\""),
    }
}

fn parse_provider(value: &str) -> anyhow::Result<EmbeddingProviderKind> {
    match value {
        "local" => Ok(EmbeddingProviderKind::Local),
        "http" => Ok(EmbeddingProviderKind::Http),
        other => bail!("unknown embedding provider {other:?}: expected \"local\" or \"http\""),
    }
}

fn parse_llm_mode(value: &str) -> anyhow::Result<LlmMode> {
    match value {
        "live" => Ok(LlmMode::Live),
        "record" => Ok(LlmMode::Record),
        "replay" => Ok(LlmMode::Replay),
        other => {
            bail!("unknown llm mode {other:?}: expected \"live\", \"record\", or \"replay\"")
        }
    }
}

fn load_config_file(path: &Path) -> anyhow::Result<ConfigFile> {
    let content = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    toml::from_str(&content).with_context(|| format!("invalid config file {}", path.display()))
}

/// Paths inside a config file are resolved relative to the file itself,
/// so a config travels with the fixture tree it describes.
fn resolve(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

impl RunConfig {
    /// Builds the effective configuration: defaults, then the config
    /// file (if given), then command-line flags.
    pub fn from_args(args: &CommonArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => Some((path.clone(), load_config_file(path)?)),
            None => None,
        };
        let base = file
            .as_ref()
            .and_then(|(path, _)| path.parent().map(Path::to_path_buf))
            .unwrap_or_default();
        let file = file.map(|(_, parsed)| parsed).unwrap_or_default();

        let chunking = file.chunking.unwrap_or_default();
        let embedding = file.embedding.unwrap_or_default();
        let llm = file.llm.unwrap_or_default();

        let corpus = if !args.corpus.is_empty() {
            args.corpus.clone()
        } else {
            file.corpus
                .unwrap_or_default()
                .into_iter()
                .map(|p| resolve(&base, p))
                .collect()
        };

        let format = match args.format.as_deref().map(String::from) {
            Some(value) => parse_format(&value)?,
            None => match file.format.as_deref() {
                Some(value) => parse_format(value)?,
                None => ReportFormat::Json,
            },
        };

        let chunk_policy = ChunkPolicy::new(
            chunking.max_chars.unwrap_or(ChunkPolicy::default().max_chars),
            chunking
                .overlap_chars
                .unwrap_or(ChunkPolicy::default().overlap_chars),
        )
        .context("invalid [chunking] configuration")?;

        let provider = match args
            .embedding_provider
            .as_deref()
            .or(embedding.provider.as_deref())
        {
            Some(value) => parse_provider(value)?,
            None => EmbeddingProviderKind::Local,
        };
        let dimension = embedding.dimension.unwrap_or(DEFAULT_LOCAL_DIMENSION);
        if dimension < 2 {
            bail!("embedding dimension must be at least 2, got {dimension}");
        }

        let mode = match args.llm_mode.as_deref().or(llm.mode.as_deref()) {
            Some(value) => parse_llm_mode(value)?,
            None => LlmMode::Live,
        };

        Ok(Self {
            corpus,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            samples: args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            format,
            out: args.out.clone().or(file.out.map(|p| resolve(&base, p))),
            cache_dir: args
                .cache_dir
                .clone()
                .or(file.cache_dir.map(|p| resolve(&base, p))),
            chunk_policy,
            embedding: EmbeddingSettings {
                provider,
                endpoint: args
                    .embedding_endpoint
                    .clone()
                    .or(embedding.endpoint),
                model: args.embedding_model.clone().or(embedding.model),
                api_key_env: embedding
                    .api_key_env
                    .unwrap_or_else(|| DEFAULT_EMBEDDING_KEY_ENV.to_string()),
                dimension,
                local_seed: embedding.local_seed.unwrap_or(0),
            },
            llm: LlmSettings {
                endpoint: args.llm_endpoint.clone().or(llm.endpoint),
                model: args.llm_model.clone().or(llm.model),
                api_key_env: llm
                    .api_key_env
                    .unwrap_or_else(|| DEFAULT_LLM_KEY_ENV.to_string()),
                mode,
                replay_dir: args
                    .replay_dir
                    .clone()
                    .or(llm.replay_dir.map(|p| resolve(&base, p))),
                retrieval_k: llm.retrieval_k.unwrap_or(DEFAULT_RETRIEVAL_K),
            },
        })
    }
}
