//! Corpus streaming, preprocessing and vocabulary construction.
//!
//! Corpora are plain UTF-8 text files, either one document per line or
//! blank-line delimited. Documents stream in file order with constant memory;
//! only vocabularies and statistics are held in RAM.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub type CorpusResult<T> = Result<T, CorpusError>;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open corpus file {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("i/o error reading corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus is not valid UTF-8 at byte offset {offset}")]
    Encoding { offset: u64 },
}

/// How documents are delimited in a corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// One document per line.
    LinePerDoc,
    /// Documents separated by one or more blank lines.
    BlankLineDelimited,
}

/// A raw document: an ordinal id plus its text.
///
/// Ids are dense (`0..n_docs`) in file order. Empty documents are legal and
/// keep their slot in the numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub text: String,
}

/// Preprocessing configuration: lowercasing, stopword removal, stemming.
///
/// Stopwords are matched after lowercasing and before stemming, so lists
/// should contain lowercased surface forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    /// ISO 639-1 language code selecting a Snowball stemmer, or `None`.
    pub stemmer: Option<String>,
    pub stopwords: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            stemmer: None,
            stopwords: BTreeSet::new(),
        }
    }
}

impl PreprocessConfig {
    pub fn with_stemmer(mut self, lang: &str) -> Self {
        self.stemmer = Some(lang.to_string());
        self
    }

    pub fn with_stopwords<I: IntoIterator<Item = String>>(mut self, words: I) -> Self {
        self.stopwords = words.into_iter().collect();
        self
    }
}

fn snowball_for(lang: &str) -> Option<rust_stemmers::Algorithm> {
    use rust_stemmers::Algorithm::*;
    match lang {
        "ar" => Some(Arabic),
        "da" => Some(Danish),
        "nl" => Some(Dutch),
        "en" => Some(English),
        "fi" => Some(Finnish),
        "fr" => Some(French),
        "de" => Some(German),
        "el" => Some(Greek),
        "hu" => Some(Hungarian),
        "it" => Some(Italian),
        "no" => Some(Norwegian),
        "pt" => Some(Portuguese),
        "ro" => Some(Romanian),
        "ru" => Some(Russian),
        "es" => Some(Spanish),
        "sv" => Some(Swedish),
        "ta" => Some(Tamil),
        "tr" => Some(Turkish),
        _ => None,
    }
}

/// A compiled preprocessing pipeline.
///
/// Construction is infallible: a language without a Snowball stemmer falls
/// back to identity stemming and the fallback is recorded in [`warnings`].
///
/// [`warnings`]: Preprocessor::warnings
pub struct Preprocessor {
    cfg: PreprocessConfig,
    stemmer: Option<rust_stemmers::Stemmer>,
    warnings: Vec<String>,
}

impl Preprocessor {
    pub fn new(cfg: PreprocessConfig) -> Self {
        let mut warnings = Vec::new();
        let stemmer = match cfg.stemmer.as_deref() {
            None => None,
            Some(lang) => match snowball_for(lang) {
                Some(alg) => Some(rust_stemmers::Stemmer::create(alg)),
                None => {
                    warnings.push(format!(
                        "no stemming algorithm for language '{lang}'; using identity stemming"
                    ));
                    None
                }
            },
        };
        Preprocessor {
            cfg,
            stemmer,
            warnings,
        }
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.cfg
    }

    /// Warnings collected while compiling the configuration.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Tokenize and normalize one document.
    ///
    /// The text is NFC-normalized, split into maximal alphanumeric runs
    /// (all punctuation separates), then lowercased, stopword-filtered and
    /// stemmed according to the configuration. Order is preserved and the
    /// function is pure.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let normalized: String = text.nfc().collect();
        let mut out = Vec::new();
        let mut current = String::new();
        for ch in normalized.chars().chain(std::iter::once(' ')) {
            if ch.is_alphanumeric() {
                current.push(ch);
                continue;
            }
            if current.is_empty() {
                continue;
            }
            let token = if self.cfg.lowercase {
                current.to_lowercase()
            } else {
                current.clone()
            };
            current.clear();
            if self.cfg.stopwords.contains(&token) {
                continue;
            }
            let token = match &self.stemmer {
                Some(stemmer) => stemmer.stem(&token).into_owned(),
                None => token,
            };
            out.push(token);
        }
        out
    }
}

struct LineReader {
    reader: BufReader<File>,
    offset: u64,
    buf: Vec<u8>,
}

impl LineReader {
    /// Next line without its terminator, or `None` at EOF.
    fn next_line(&mut self) -> Option<CorpusResult<String>> {
        self.buf.clear();
        let start = self.offset;
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(n) => {
                self.offset += n as u64;
                let mut slice = self.buf.as_slice();
                if slice.last() == Some(&b'\n') {
                    slice = &slice[..slice.len() - 1];
                }
                if slice.last() == Some(&b'\r') {
                    slice = &slice[..slice.len() - 1];
                }
                match std::str::from_utf8(slice) {
                    Ok(s) => Some(Ok(s.to_string())),
                    Err(e) => Some(Err(CorpusError::Encoding {
                        offset: start + e.valid_up_to() as u64,
                    })),
                }
            }
            Err(e) => Some(Err(CorpusError::Io(e))),
        }
    }
}

/// Streaming iterator over the documents of a corpus file.
pub struct DocumentIter {
    lines: LineReader,
    format: CorpusFormat,
    next_id: usize,
    done: bool,
}

impl Iterator for DocumentIter {
    type Item = CorpusResult<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.format {
            CorpusFormat::LinePerDoc => match self.lines.next_line()? {
                Ok(text) => {
                    let id = self.next_id;
                    self.next_id += 1;
                    Some(Ok(Document { id, text }))
                }
                Err(e) => {
                    self.done = true;
                    Some(Err(e))
                }
            },
            CorpusFormat::BlankLineDelimited => {
                let mut para: Vec<String> = Vec::new();
                loop {
                    match self.lines.next_line() {
                        None => {
                            self.done = true;
                            if para.is_empty() {
                                return None;
                            }
                            break;
                        }
                        Some(Err(e)) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                        Some(Ok(line)) => {
                            if line.trim().is_empty() {
                                if para.is_empty() {
                                    continue; // collapse runs of blank lines
                                }
                                break;
                            }
                            para.push(line);
                        }
                    }
                }
                let id = self.next_id;
                self.next_id += 1;
                Some(Ok(Document {
                    id,
                    text: para.join("\n"),
                }))
            }
        }
    }
}

/// Open a corpus file for streaming.
///
/// Documents are yielded in file order in a single pass; memory use is
/// bounded by the longest document, not the corpus.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> CorpusResult<DocumentIter> {
    let file = File::open(path).map_err(|source| CorpusError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(DocumentIter {
        lines: LineReader {
            reader: BufReader::new(file),
            offset: 0,
            buf: Vec::new(),
        },
        format,
        next_id: 0,
        done: false,
    })
}

/// A corpus that can be streamed repeatedly (trainers pass over the data
/// once per epoch).
pub trait CorpusSource: Sync {
    fn documents(&self) -> CorpusResult<Box<dyn Iterator<Item = CorpusResult<Document>> + Send>>;
}

/// File-backed corpus; every call to [`CorpusSource::documents`] reopens the file.
#[derive(Debug, Clone)]
pub struct TextCorpus {
    pub path: PathBuf,
    pub format: CorpusFormat,
}

impl TextCorpus {
    pub fn new<P: Into<PathBuf>>(path: P, format: CorpusFormat) -> Self {
        TextCorpus {
            path: path.into(),
            format,
        }
    }
}

impl CorpusSource for TextCorpus {
    fn documents(&self) -> CorpusResult<Box<dyn Iterator<Item = CorpusResult<Document>> + Send>> {
        Ok(Box::new(load_corpus(&self.path, self.format)?))
    }
}

/// In-memory corpus, one string per document. Used by tests and toy runs.
#[derive(Debug, Clone, Default)]
pub struct MemCorpus {
    pub docs: Vec<String>,
}

impl MemCorpus {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(docs: I) -> Self {
        MemCorpus {
            docs: docs.into_iter().map(Into::into).collect(),
        }
    }
}

impl CorpusSource for MemCorpus {
    fn documents(&self) -> CorpusResult<Box<dyn Iterator<Item = CorpusResult<Document>> + Send>> {
        let docs: Vec<Document> = self
            .docs
            .iter()
            .enumerate()
            .map(|(id, text)| Document {
                id,
                text: text.clone(),
            })
            .collect();
        Ok(Box::new(docs.into_iter().map(Ok)))
    }
}

/// Word ↔ id mapping with corpus frequencies.
///
/// Ids are dense `0..len` and assigned by descending frequency, ties broken
/// lexicographically, which makes construction deterministic regardless of
/// how partial counts were merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    /// Build from raw token counts, keeping words with count ≥ `min_count`.
    pub fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Self {
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut words = Vec::with_capacity(entries.len());
        let mut freq = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (word, count)) in entries.into_iter().enumerate() {
            index.insert(word.clone(), i as u32);
            words.push(word);
            freq.push(count);
        }
        Vocabulary {
            words,
            counts: freq,
            index,
            min_count,
        }
    }

    pub fn from_entries(entries: Vec<(String, u64)>, min_count: u64) -> Self {
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (word, count)) in entries.into_iter().enumerate() {
            index.insert(word.clone(), i as u32);
            words.push(word);
            counts.push(count);
        }
        Vocabulary {
            words,
            counts,
            index,
            min_count,
        }
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total corpus frequency of the retained words.
    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Corpus-level counts after preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub token_count: u64,
    pub unique_token_count: u64,
    pub doc_count: u64,
}

/// Count raw token frequencies over a corpus.
pub fn count_tokens(
    source: &dyn CorpusSource,
    pre: &Preprocessor,
) -> CorpusResult<HashMap<String, u64>> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in source.documents()? {
        for token in pre.tokens(&doc?.text) {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Merge partial token counts (e.g. from parallel workers). Addition is
/// order-independent, so the merged result is deterministic.
pub fn merge_counts(mut into: HashMap<String, u64>, from: HashMap<String, u64>) -> HashMap<String, u64> {
    for (word, c) in from {
        *into.entry(word).or_insert(0) += c;
    }
    into
}

/// Build the vocabulary of a corpus under a preprocessing configuration.
pub fn build_vocabulary(
    source: &dyn CorpusSource,
    pre: &Preprocessor,
    min_count: u64,
) -> CorpusResult<Vocabulary> {
    Ok(Vocabulary::from_counts(
        count_tokens(source, pre)?,
        min_count,
    ))
}

/// Compute token/type/document counts for a corpus.
pub fn corpus_stats(source: &dyn CorpusSource, pre: &Preprocessor) -> CorpusResult<CorpusStats> {
    let mut token_count = 0u64;
    let mut doc_count = 0u64;
    let mut seen: HashMap<String, ()> = HashMap::new();
    for doc in source.documents()? {
        doc_count += 1;
        for token in pre.tokens(&doc?.text) {
            token_count += 1;
            seen.entry(token).or_insert(());
        }
    }
    Ok(CorpusStats {
        token_count,
        unique_token_count: seen.len() as u64,
        doc_count,
    })
}

/// Load a stopword file: one surface form per line, `#` comments allowed.
pub fn load_stopwords(path: &Path) -> CorpusResult<BTreeSet<String>> {
    let file = File::open(path).map_err(|source| CorpusError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let mut words = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        words.insert(trimmed.to_string());
    }
    Ok(words)
}
