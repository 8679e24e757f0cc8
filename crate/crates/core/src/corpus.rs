//! Corpus handling: document loading, chunking, occurrence search, and
//! seeded contextual sampling.
//!
//! Offsets are byte offsets into UTF-8 text, always aligned to character
//! boundaries. Sizes in [`ChunkPolicy`] count characters, not bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Characters of context kept on each side of an occurrence when a chunk is
/// trimmed down to a context window.
pub const CONTEXT_RADIUS_CHARS: usize = 300;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid chunk policy: max_chars ({max_chars}) must exceed overlap_chars ({overlap_chars})")]
    InvalidChunkPolicy {
        max_chars: usize,
        overlap_chars: usize,
    },
    #[error("failed to load {count} corpus file(s):\n{}", failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("\n"))]
    Load {
        count: usize,
        failures: Vec<LoadFailure>,
    },
}

/// One file that could not be loaded.
#[derive(Debug, thiserror::Error)]
pub enum LoadFailure {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: file is empty")]
    EmptyDocument { path: String },
}

/// A loaded corpus document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub source_path: String,
    pub text: String,
}

/// Chunking parameters. Boundaries prefer paragraph breaks, then
/// sentence-final punctuation, then whitespace, and finally a hard split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPolicy {
    pub max_chars: usize,
    pub overlap_chars: usize,
}

impl ChunkPolicy {
    pub fn new(max_chars: usize, overlap_chars: usize) -> Result<Self, CorpusError> {
        if max_chars <= overlap_chars {
            return Err(CorpusError::InvalidChunkPolicy {
                max_chars,
                overlap_chars,
            });
        }
        Ok(Self {
            max_chars,
            overlap_chars,
        })
    }
}

impl Default for ChunkPolicy {
    fn default() -> Self {
        Self {
            max_chars: 1200,
            overlap_chars: 150,
        }
    }
}

/// A contiguous slice of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub index: usize,
    pub text: String,
    /// Byte offsets of this chunk within the source document.
    pub span: (usize, usize),
}

/// One match of a stimulus phrase inside a chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub word: String,
    pub doc_id: String,
    pub chunk_index: usize,
    /// Byte offsets within the chunk text.
    pub span: (usize, usize),
    pub matched_text: String,
}

/// Where one stimulus word draws its context from in a given sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextAssignment {
    /// The word is embedded in the context of this occurrence.
    Occurrence(Occurrence),
    /// The word has no corpus occurrence and is embedded standalone.
    StandaloneFallback,
}

/// One contextual sample: every stimulus word mapped to a context choice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualSample {
    pub sample_index: usize,
    pub assignment: BTreeMap<String, ContextAssignment>,
}

/// Paired stimulus word lists ready for scoring: two target sets and two
/// attribute sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusWordSets {
    pub targets_x: Vec<String>,
    pub targets_y: Vec<String>,
    pub attributes_a: Vec<String>,
    pub attributes_b: Vec<String>,
}

impl StimulusWordSets {
    /// All stimulus words in deterministic order (X, Y, A, B), deduplicated.
    pub fn words(&self) -> Vec<&str> {
        let mut seen = std::collections::BTreeSet::new();
        let mut words = Vec::new();
        for word in self
            .targets_x
            .iter()
            .chain(&self.targets_y)
            .chain(&self.attributes_a)
            .chain(&self.attributes_b)
        {
            if seen.insert(word.as_str()) {
                words.push(word.as_str());
            }
        }
        words
    }
}

/// Loads documents from explicit file paths, sorted lexicographically by
/// path so the corpus is independent of argument order. Ids come from file
/// stems, disambiguated with a numeric suffix on collision. All unreadable
/// or empty files are collected into a single error.
pub fn load_documents(paths: &[PathBuf]) -> Result<Vec<Document>, CorpusError> {
    let mut sorted: Vec<&PathBuf> = paths.iter().collect();
    sorted.sort();
    sorted.dedup();

    let mut documents = Vec::new();
    let mut failures = Vec::new();
    let mut used_ids: BTreeMap<String, usize> = BTreeMap::new();

    for path in sorted {
        let display = path.display().to_string();
        match std::fs::read_to_string(path) {
            Err(source) => failures.push(LoadFailure::Io {
                path: display,
                source,
            }),
            Ok(text) if text.trim().is_empty() => {
                failures.push(LoadFailure::EmptyDocument { path: display });
            }
            Ok(text) => {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "document".to_string());
                let n = used_ids.entry(stem.clone()).or_insert(0);
                *n += 1;
                let id = if *n == 1 {
                    stem
                } else {
                    format!("{stem}-{n}")
                };
                documents.push(Document {
                    id,
                    source_path: display,
                    text,
                });
            }
        }
    }

    if failures.is_empty() {
        Ok(documents)
    } else {
        Err(CorpusError::Load {
            count: failures.len(),
            failures,
        })
    }
}

/// Convenience wrapper: expands directories to their `.txt` / `.md` files
/// (recursively, sorted), keeps plain files as-is, then loads everything.
pub fn load_corpus(paths: &[PathBuf]) -> Result<Vec<Document>, CorpusError> {
    let mut files = Vec::new();
    let mut failures = Vec::new();
    for path in paths {
        if path.is_dir() {
            if let Err(source) = collect_text_files(path, &mut files) {
                failures.push(LoadFailure::Io {
                    path: path.display().to_string(),
                    source,
                });
            }
        } else {
            files.push(path.clone());
        }
    }
    if !failures.is_empty() {
        return Err(CorpusError::Load {
            count: failures.len(),
            failures,
        });
    }
    load_documents(&files)
}

fn collect_text_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .collect();
    entries.sort();
    for entry in entries {
        if entry.is_dir() {
            collect_text_files(&entry, out)?;
        } else if matches!(
            entry.extension().and_then(|e| e.to_str()),
            Some("txt") | Some("md")
        ) {
            out.push(entry);
        }
    }
    Ok(())
}

/// Splits a document into overlapping chunks under the policy.
///
/// Chunk indices are contiguous from 0, spans are in-bounds, and the union
/// of spans covers the whole document.
pub fn chunk(doc: &Document, policy: ChunkPolicy) -> Result<Vec<Chunk>, CorpusError> {
    if policy.max_chars <= policy.overlap_chars {
        return Err(CorpusError::InvalidChunkPolicy {
            max_chars: policy.max_chars,
            overlap_chars: policy.overlap_chars,
        });
    }
    let text = doc.text.as_str();
    // Byte offset of every char, plus the end sentinel; all position math is
    // done in char indices and mapped back through this table.
    let char_starts: Vec<usize> = text
        .char_indices()
        .map(|(byte, _)| byte)
        .chain(std::iter::once(text.len()))
        .collect();
    let n_chars = char_starts.len() - 1;

    let mut chunks = Vec::new();
    let mut start = 0usize; // char index
    loop {
        if n_chars - start <= policy.max_chars {
            push_chunk(&mut chunks, doc, &char_starts, start, n_chars);
            break;
        }
        let window_end = start + policy.max_chars;
        let split = find_split(text, &char_starts, start, window_end, policy.overlap_chars)
            .unwrap_or(window_end);
        push_chunk(&mut chunks, doc, &char_starts, start, split);
        start = split - policy.overlap_chars;
    }
    Ok(chunks)
}

fn push_chunk(
    chunks: &mut Vec<Chunk>,
    doc: &Document,
    char_starts: &[usize],
    start_char: usize,
    end_char: usize,
) {
    let span = (char_starts[start_char], char_starts[end_char]);
    chunks.push(Chunk {
        doc_id: doc.id.clone(),
        index: chunks.len(),
        text: doc.text[span.0..span.1].to_string(),
        span,
    });
}

/// Finds the best split point (char index) in `(start + overlap, window_end]`.
/// Preference order: after a paragraph break, after sentence-final
/// punctuation, after whitespace. The lower bound keeps the next chunk start
/// strictly advancing even after overlap is subtracted.
fn find_split(
    text: &str,
    char_starts: &[usize],
    start: usize,
    window_end: usize,
    overlap: usize,
) -> Option<usize> {
    let min_split = start + overlap + 1;
    let window = &text[char_starts[start]..char_starts[window_end]];
    let chars: Vec<char> = window.chars().collect();

    // Paragraph break: split after the "\n\n".
    let mut candidate = None;
    for i in (1..chars.len()).rev() {
        if chars[i] == '\n' && chars[i - 1] == '\n' {
            let split = start + i + 1;
            if split >= min_split {
                candidate = Some(split);
            }
            break;
        }
    }
    if candidate.is_some() {
        return candidate;
    }

    // Sentence-final punctuation followed by whitespace: split after the
    // whitespace character.
    for i in (0..chars.len() - 1).rev() {
        if matches!(chars[i], '.' | '!' | '?') && chars[i + 1].is_whitespace() {
            let split = start + i + 2;
            if split >= min_split {
                return Some(split);
            }
            break;
        }
    }

    // Any whitespace: split after it.
    for i in (0..chars.len()).rev() {
        if chars[i].is_whitespace() {
            let split = start + i + 1;
            if split >= min_split {
                return Some(split);
            }
            break;
        }
    }

    None
}

/// A normalized view of text: lowercased, whitespace runs collapsed to a
/// single space, with each normalized char carrying its source byte range.
struct NormalizedText {
    chars: Vec<char>,
    spans: Vec<(usize, usize)>,
}

fn normalize_with_spans(text: &str) -> NormalizedText {
    let mut chars = Vec::new();
    let mut spans = Vec::new();
    let mut pending_ws: Option<(usize, usize)> = None;
    for (byte, ch) in text.char_indices() {
        let end = byte + ch.len_utf8();
        if ch.is_whitespace() {
            pending_ws = Some(match pending_ws {
                Some((ws_start, _)) => (ws_start, end),
                None => (byte, end),
            });
            continue;
        }
        if let Some(ws) = pending_ws.take() {
            chars.push(' ');
            spans.push(ws);
        }
        for lower in ch.to_lowercase() {
            chars.push(lower);
            spans.push((byte, end));
        }
    }
    // trailing whitespace is dropped; nothing can match past the last
    // non-whitespace char
    NormalizedText { chars, spans }
}

fn normalize_phrase(phrase: &str) -> Vec<char> {
    let mut out = Vec::new();
    let mut pending_space = false;
    for ch in phrase.trim().chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}

/// Normalizes text the same way occurrence matching does: lowercase with
/// whitespace runs collapsed to single spaces and ends trimmed.
pub fn normalize_text(text: &str) -> String {
    normalize_phrase(text).into_iter().collect()
}

/// Finds every match of `phrase` in the chunks, case-insensitively and with
/// whitespace runs treated as equivalent (so multi-word phrases match across
/// line breaks). Results are ordered by (doc, chunk, offset).
pub fn find_occurrences(phrase: &str, chunks: &[Chunk]) -> Vec<Occurrence> {
    let needle = normalize_phrase(phrase);
    if needle.is_empty() {
        return Vec::new();
    }
    let mut occurrences = Vec::new();
    for chunk in chunks {
        let normalized = normalize_with_spans(&chunk.text);
        let haystack = &normalized.chars;
        if haystack.len() < needle.len() {
            continue;
        }
        for i in 0..=haystack.len() - needle.len() {
            if haystack[i..i + needle.len()] == needle[..] {
                let start = normalized.spans[i].0;
                let end = normalized.spans[i + needle.len() - 1].1;
                occurrences.push(Occurrence {
                    word: phrase.to_string(),
                    doc_id: chunk.doc_id.clone(),
                    chunk_index: chunk.index,
                    span: (start, end),
                    matched_text: chunk.text[start..end].to_string(),
                });
            }
        }
    }
    occurrences.sort_by(|a, b| {
        (&a.doc_id, a.chunk_index, a.span.0).cmp(&(&b.doc_id, b.chunk_index, b.span.0))
    });
    occurrences
}

/// Draws `n_samples` contextual samples. Each stimulus word is assigned one
/// of its occurrences uniformly at random (with replacement across samples)
/// from a ChaCha stream seeded by `seed`; words with no occurrence get the
/// standalone fallback marker. Output is fully determined by
/// (sets, chunks, n_samples, seed).
pub fn sample_contexts(
    sets: &StimulusWordSets,
    chunks: &[Chunk],
    n_samples: usize,
    seed: u64,
) -> Vec<ContextualSample> {
    sample_contexts_stream(sets, chunks, n_samples, seed, 0)
}

/// [`sample_contexts`] on an explicit ChaCha stream, so independent
/// consumers (one per scored group pair) can share a master seed without
/// sharing random draws.
pub fn sample_contexts_stream(
    sets: &StimulusWordSets,
    chunks: &[Chunk],
    n_samples: usize,
    seed: u64,
    stream: u64,
) -> Vec<ContextualSample> {
    let words = sets.words();
    let occurrences: Vec<(&str, Vec<Occurrence>)> = words
        .iter()
        .map(|&word| (word, find_occurrences(word, chunks)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut samples = Vec::with_capacity(n_samples);
    for sample_index in 0..n_samples {
        let mut assignment = BTreeMap::new();
        for (word, found) in &occurrences {
            let choice = match found.len() {
                0 => ContextAssignment::StandaloneFallback,
                1 => ContextAssignment::Occurrence(found[0].clone()),
                n => ContextAssignment::Occurrence(found[rng.random_range(0..n)].clone()),
            };
            assignment.insert((*word).to_string(), choice);
        }
        samples.push(ContextualSample {
            sample_index,
            assignment,
        });
    }
    samples
}

/// Trims chunk text to at most `radius_chars` characters on each side of the
/// occurrence span, snapping to char boundaries.
pub fn context_window(chunk_text: &str, span: (usize, usize), radius_chars: usize) -> &str {
    if radius_chars == 0 {
        return &chunk_text[span.0..span.1];
    }
    let start = chunk_text[..span.0]
        .char_indices()
        .rev()
        .nth(radius_chars.saturating_sub(1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let end = chunk_text[span.1..]
        .char_indices()
        .nth(radius_chars)
        .map(|(i, _)| span.1 + i)
        .unwrap_or(chunk_text.len());
    &chunk_text[start..end]
}
