//! Command-line corpus bias auditing.
//!
//! Exit codes: 0 success, 1 operational failure (bad input, I/O,
//! provider errors, usage mistakes), 2 extraction produced no admissible
//! word sets. Malformed input never panics.

mod commands;
mod config;
mod runtime;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "ceat",
    version,
    about = "Audit a text corpus for demographic bias via contextualized embedding association tests"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each overrides the corresponding
/// config-file key; the file overrides built-in defaults.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Corpus text file or directory; repeat for multiple corpora
    #[arg(long, global = true, value_name = "PATH")]
    pub corpus: Vec<PathBuf>,
    /// Master seed for context sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Contextual samples per group pair
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Report format: json or md
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output path (stdout when omitted)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Directory for the on-disk embedding cache
    #[arg(long, global = true, value_name = "PATH")]
    pub cache_dir: Option<PathBuf>,
    /// Embedding provider: local or http
    #[arg(long, global = true)]
    pub embedding_provider: Option<String>,
    /// Embeddings API base URL (http provider)
    #[arg(long, global = true, value_name = "URL")]
    pub embedding_endpoint: Option<String>,
    /// Embedding model id (http provider)
    #[arg(long, global = true, value_name = "ID")]
    pub embedding_model: Option<String>,
    /// Chat-completions API base URL
    #[arg(long, global = true, value_name = "URL")]
    pub llm_endpoint: Option<String>,
    /// Chat model id
    #[arg(long, global = true, value_name = "ID")]
    pub llm_model: Option<String>,
    /// LLM mode: live, record, or replay
    #[arg(long, global = true)]
    pub llm_mode: Option<String>,
    /// Replay store directory (record and replay modes)
    #[arg(long, global = true, value_name = "PATH")]
    pub replay_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract demographic word sets from the corpus with the LLM
    Extract,
    /// Score each corpus against a word-set file
    Score {
        /// Word-set file: {"groups":[{"name","target_words","attribute_words"}]}
        wordsets: PathBuf,
    },
    /// Compare extracted word sets against ground-truth word sets
    Evaluate {
        /// Ground-truth word-set file
        ground_truth: PathBuf,
        /// Extracted word-set file
        extracted: PathBuf,
        /// Ground-truth score file, for the optional score comparison
        #[arg(long, requires = "extracted_scores")]
        gt_scores: Option<PathBuf>,
        /// Extracted score file, for the optional score comparison
        #[arg(long, requires = "gt_scores")]
        extracted_scores: Option<PathBuf>,
    },
    /// Correlate two score files
    Correlate {
        /// First score file (the reference side)
        left: PathBuf,
        /// Second score file
        right: PathBuf,
    },
    /// Run the whole pipeline: extract, validate, score, report
    Audit {
        /// Ground-truth word-set file to compare the extraction against
        #[arg(long, value_name = "PATH")]
        ground_truth: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = RunConfig::from_args(&cli.common)?;
    match &cli.command {
        Command::Extract => commands::extract::run(&config),
        Command::Score { wordsets } => commands::score::run(&config, wordsets),
        Command::Evaluate {
            ground_truth,
            extracted,
            gt_scores,
            extracted_scores,
        } => commands::evaluate::run(
            &config,
            ground_truth,
            extracted,
            gt_scores.as_deref(),
            extracted_scores.as_deref(),
        ),
        Command::Correlate { left, right } => commands::correlate::run(&config, left, right),
        Command::Audit { ground_truth } => commands::audit::run(&config, ground_truth.as_deref()),
    }
}

/// Exit 2 is reserved for one outcome: extraction that yielded no
/// admissible word sets. Everything else unsuccessful is exit 1,
/// including command-line usage errors.
fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    let inadmissible = err
        .chain()
        .find_map(|cause| cause.downcast_ref::<ceat_core::ExtractionError>())
        .is_some_and(|e| matches!(e, ceat_core::ExtractionError::NoAdmissibleGroups { .. }));
    if inadmissible {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap would exit 2 on usage errors; that code means
            // something else here
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}
