//! Word-pair translation into a reference language.
//!
//! Three backends: a generic HTTP JSON service, a bilingual lexicon file, and
//! identity (for the reference language itself). Results go through a
//! persistent append-only TSV cache so experiments re-run offline and
//! bit-identically.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goldsets::{DatasetId, GoldSet};

pub type TranslateResult<T> = Result<T, TranslateError>;

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("cannot translate an empty word")]
    EmptyInput,
    #[error("translation backend unreachable after {attempts} attempt(s): {message}")]
    BackendUnreachable { attempts: u32, message: String },
    #[error("backend returned an empty translation for '{word}'")]
    EmptyTranslation { word: String },
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("lexicon has no entry for '{word}'")]
    LexiconMiss { word: String },
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache file line {line} is malformed")]
    CacheParse { line: usize },
    #[error("gold translation file line {line} is malformed")]
    GoldParse { line: usize },
    #[error("no gold translation entry for pair(s): {}", format_pairs(.0))]
    MissingGoldEntries(Vec<(String, String)>),
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn normalize(word: &str) -> String {
    word.trim().to_lowercase()
}

/// How a pair is submitted to the backend: both words in one request so they
/// disambiguate each other, or one word at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    #[default]
    Joint,
    WordAtATime,
}

/// HTTP backend configuration. The wire contract is a single JSON POST:
/// `{"q": "<text>", "source": "<lang>", "target": "<lang>"}` answered by
/// `{"translatedText": "<text>"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpBackendConfig {
    pub endpoint: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    250
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Self {
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build();
        HttpBackend {
            config,
            agent: agent_config.into(),
        }
    }

    /// One translation request with retry and exponential backoff on
    /// transport errors and 5xx responses.
    fn request(&self, text: &str, source: &str, target: &str) -> TranslateResult<String> {
        let attempts = self.config.retries.max(1);
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = self.config.backoff_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
            let result = self
                .agent
                .post(&self.config.endpoint)
                .send_json(serde_json::json!({
                    "q": text,
                    "source": source,
                    "target": target,
                }));
            match result {
                Ok(mut response) => {
                    let body: serde_json::Value =
                        response.body_mut().read_json().map_err(|e| {
                            TranslateError::MalformedResponse(format!("invalid JSON body: {e}"))
                        })?;
                    let translated = body
                        .get("translatedText")
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| {
                            TranslateError::MalformedResponse(
                                "response lacks 'translatedText'".into(),
                            )
                        })?;
                    return Ok(translated.to_string());
                }
                Err(ureq::Error::StatusCode(code)) if code >= 500 => {
                    last_error = format!("server returned {code}");
                }
                Err(ureq::Error::StatusCode(code)) => {
                    return Err(TranslateError::BackendUnreachable {
                        attempts: attempt + 1,
                        message: format!("server returned {code}"),
                    });
                }
                Err(e) => {
                    last_error = e.to_string();
                }
            }
        }
        Err(TranslateError::BackendUnreachable {
            attempts,
            message: last_error,
        })
    }
}

/// A translation backend. Identity returns its input unchanged (modulo
/// normalization) and is the reference-language no-op.
pub enum Backend {
    Identity,
    Lexicon(HashMap<String, String>),
    Http(HttpBackend),
}

impl Backend {
    pub fn tag(&self) -> &'static str {
        match self {
            Backend::Identity => "identity",
            Backend::Lexicon(_) => "lexicon",
            Backend::Http(_) => "http",
        }
    }

    /// Load a lexicon backend from a TSV file of `source_word<TAB>target_word`.
    pub fn lexicon_from_file(path: &Path) -> TranslateResult<Backend> {
        let file = File::open(path).map_err(|source| TranslateError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut map = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next()) {
                (Some(src), Some(tgt)) => {
                    map.insert(normalize(src), normalize(tgt));
                }
                _ => return Err(TranslateError::CacheParse { line: i + 1 }),
            }
        }
        Ok(Backend::Lexicon(map))
    }

    fn lookup_word(map: &HashMap<String, String>, word: &str) -> TranslateResult<String> {
        map.get(word)
            .cloned()
            .ok_or_else(|| TranslateError::LexiconMiss {
                word: word.to_string(),
            })
    }

    fn translate(
        &self,
        w1: &str,
        w2: &str,
        source: &str,
        target: &str,
        mode: PairMode,
    ) -> TranslateResult<(String, String)> {
        match self {
            Backend::Identity => Ok((w1.to_string(), w2.to_string())),
            Backend::Lexicon(map) => Ok((
                Self::lookup_word(map, w1)?,
                Self::lookup_word(map, w2)?,
            )),
            Backend::Http(http) => match mode {
                PairMode::Joint => {
                    let text = format!("{w1}, {w2}");
                    let translated = http.request(&text, source, target)?;
                    let parts: Vec<&str> = translated.splitn(2, ',').collect();
                    if parts.len() != 2 {
                        return Err(TranslateError::MalformedResponse(format!(
                            "expected two comma-separated words, got '{translated}'"
                        )));
                    }
                    Ok((parts[0].to_string(), parts[1].to_string()))
                }
                PairMode::WordAtATime => Ok((
                    http.request(w1, source, target)?,
                    http.request(w2, source, target)?,
                )),
            },
        }
    }
}

/// A translated word pair with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedPair {
    pub source_w1: String,
    pub source_w2: String,
    pub source_lang: String,
    pub target_w1: String,
    pub target_w2: String,
    pub target_lang: String,
    pub backend: String,
    pub cache_hit: bool,
    pub unix_time: u64,
}

type CacheKey = (String, String, String, String); // backend, src_lang, w1, w2

struct Cache {
    map: HashMap<CacheKey, (String, String)>,
    file: Option<File>,
}

impl Cache {
    fn in_memory() -> Self {
        Cache {
            map: HashMap::new(),
            file: None,
        }
    }

    /// Open (or create) a persistent cache file:
    /// `src_lang<TAB>w1<TAB>w2<TAB>w1'<TAB>w2'<TAB>backend`, append-only.
    fn open(path: &Path) -> TranslateResult<Self> {
        let mut map = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|source| TranslateError::Open {
                path: path.to_path_buf(),
                source,
            })?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() != 6 {
                    return Err(TranslateError::CacheParse { line: i + 1 });
                }
                map.insert(
                    (
                        cols[5].to_string(),
                        cols[0].to_string(),
                        cols[1].to_string(),
                        cols[2].to_string(),
                    ),
                    (cols[3].to_string(), cols[4].to_string()),
                );
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| TranslateError::Open {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(Cache {
            map,
            file: Some(file),
        })
    }

    fn get(&self, key: &CacheKey) -> Option<(String, String)> {
        self.map.get(key).cloned()
    }

    fn insert(&mut self, key: CacheKey, value: (String, String)) -> TranslateResult<()> {
        if let Some(file) = &mut self.file {
            writeln!(
                file,
                "{}\t{}\t{}\t{}\t{}\t{}",
                key.1, key.2, key.3, value.0, value.1, key.0
            )?;
            file.flush()?;
        }
        self.map.insert(key, value);
        Ok(())
    }
}

/// A configured translation pipeline: backend + language pair + cache.
pub struct Translator {
    backend: Backend,
    source_lang: String,
    target_lang: String,
    pair_mode: PairMode,
    cache: Mutex<Cache>,
    backend_calls: AtomicU64,
}

impl Translator {
    pub fn new(backend: Backend, source_lang: &str, target_lang: &str) -> Self {
        Translator {
            backend,
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            pair_mode: PairMode::Joint,
            cache: Mutex::new(Cache::in_memory()),
            backend_calls: AtomicU64::new(0),
        }
    }

    /// Attach a persistent cache file (created if missing).
    pub fn with_cache_file(mut self, path: &Path) -> TranslateResult<Self> {
        self.cache = Mutex::new(Cache::open(path)?);
        Ok(self)
    }

    pub fn with_pair_mode(mut self, mode: PairMode) -> Self {
        self.pair_mode = mode;
        self
    }

    pub fn source_lang(&self) -> &str {
        &self.source_lang
    }

    pub fn target_lang(&self) -> &str {
        &self.target_lang
    }

    pub fn backend_tag(&self) -> &'static str {
        self.backend.tag()
    }

    /// Number of actual backend calls made (cache hits excluded).
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::Relaxed)
    }

    /// Translate one pair, consulting the cache first. Input and output
    /// words are normalized (trimmed, lowercased).
    pub fn translate_pair(&self, w1: &str, w2: &str) -> TranslateResult<TranslatedPair> {
        let w1 = normalize(w1);
        let w2 = normalize(w2);
        if w1.is_empty() || w2.is_empty() {
            return Err(TranslateError::EmptyInput);
        }
        let key: CacheKey = (
            self.backend.tag().to_string(),
            self.source_lang.clone(),
            w1.clone(),
            w2.clone(),
        );
        let unix_time = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        if let Some((t1, t2)) = self.cache.lock().unwrap().get(&key) {
            return Ok(TranslatedPair {
                source_w1: w1,
                source_w2: w2,
                source_lang: self.source_lang.clone(),
                target_w1: t1,
                target_w2: t2,
                target_lang: self.target_lang.clone(),
                backend: self.backend.tag().to_string(),
                cache_hit: true,
                unix_time,
            });
        }
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        let (t1, t2) = self
            .backend
            .translate(&w1, &w2, &self.source_lang, &self.target_lang, self.pair_mode)?;
        let t1 = normalize(&t1);
        let t2 = normalize(&t2);
        for (raw, out) in [(&w1, &t1), (&w2, &t2)] {
            if out.is_empty() {
                return Err(TranslateError::EmptyTranslation { word: raw.clone() });
            }
        }
        self.cache
            .lock()
            .unwrap()
            .insert(key, (t1.clone(), t2.clone()))?;
        Ok(TranslatedPair {
            source_w1: w1,
            source_w2: w2,
            source_lang: self.source_lang.clone(),
            target_w1: t1,
            target_w2: t2,
            target_lang: self.target_lang.clone(),
            backend: self.backend.tag().to_string(),
            cache_hit: false,
            unix_time,
        })
    }
}

/// A failed pair inside a batch, kept alongside the successes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFailure {
    pub index: usize,
    pub w1: String,
    pub w2: String,
    pub error: String,
}

/// Result of translating a whole gold set: successes in dataset order plus
/// collected failures. A failing pair never aborts the batch.
#[derive(Debug)]
pub struct BatchOutcome {
    pub results: Vec<(usize, TranslatedPair)>,
    pub failures: Vec<PairFailure>,
}

/// Translate every pair of a gold set, preserving dataset order.
/// `max_in_flight` > 1 issues backend calls from that many worker threads;
/// cache access stays serialized.
pub fn batch_translate(
    goldset: &GoldSet,
    translator: &Translator,
    max_in_flight: usize,
) -> BatchOutcome {
    let n = goldset.pairs.len();
    let workers = max_in_flight.clamp(1, n.max(1));
    let mut slots: Vec<Option<Result<TranslatedPair, String>>> = Vec::new();
    slots.resize_with(n, || None);

    if workers <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            let pair = &goldset.pairs[i];
            *slot = Some(
                translator
                    .translate_pair(&pair.w1, &pair.w2)
                    .map_err(|e| e.to_string()),
            );
        }
    } else {
        let next = AtomicU64::new(0);
        let slot_refs: Vec<Mutex<&mut Option<Result<TranslatedPair, String>>>> =
            slots.iter_mut().map(Mutex::new).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed) as usize;
                    if i >= n {
                        break;
                    }
                    let pair = &goldset.pairs[i];
                    let outcome = translator
                        .translate_pair(&pair.w1, &pair.w2)
                        .map_err(|e| e.to_string());
                    **slot_refs[i].lock().unwrap() = Some(outcome);
                });
            }
        });
    }

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.expect("every pair visited") {
            Ok(pair) => results.push((i, pair)),
            Err(error) => failures.push(PairFailure {
                index: i,
                w1: goldset.pairs[i].w1.clone(),
                w2: goldset.pairs[i].w2.clone(),
                error,
            }),
        }
    }
    BatchOutcome { results, failures }
}

/// Reference translations of a dataset: source pair → English pair.
#[derive(Debug, Clone)]
pub struct GoldTranslationSet {
    pub dataset: DatasetId,
    pub lang: String,
    map: HashMap<(String, String), (String, String)>,
}

impl GoldTranslationSet {
    /// Load from TSV `w1<TAB>w2<TAB>en_w1<TAB>en_w2`.
    pub fn load(dataset: DatasetId, lang: &str, path: &Path) -> TranslateResult<Self> {
        let file = File::open(path).map_err(|source| TranslateError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut map = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(TranslateError::GoldParse { line: i + 1 });
            }
            map.insert(
                (normalize(cols[0]), normalize(cols[1])),
                (normalize(cols[2]), normalize(cols[3])),
            );
        }
        Ok(GoldTranslationSet {
            dataset,
            lang: lang.to_string(),
            map,
        })
    }

    pub fn from_entries<I>(dataset: DatasetId, lang: &str, entries: I) -> Self
    where
        I: IntoIterator<Item = ((String, String), (String, String))>,
    {
        GoldTranslationSet {
            dataset,
            lang: lang.to_string(),
            map: entries
                .into_iter()
                .map(|((a, b), (c, d))| ((normalize(&a), normalize(&b)), (normalize(&c), normalize(&d))))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn lookup(&self, w1: &str, w2: &str) -> Option<&(String, String)> {
        self.map.get(&(normalize(w1), normalize(w2)))
    }
}

/// Accuracy definition: strict counts a pair only when both words match the
/// gold English words; per-word gives half credit per matching word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AccuracyMode {
    #[default]
    StrictPair,
    PerWord,
}

/// Fraction of correctly translated pairs in `[0, 1]`. Matching is exact on
/// normalized words; no stemming. Every translated pair must have a gold
/// entry, otherwise the offending pairs are listed in the error.
pub fn translation_accuracy(
    translated: &[TranslatedPair],
    gold: &GoldTranslationSet,
    mode: AccuracyMode,
) -> TranslateResult<f64> {
    if translated.is_empty() {
        return Ok(0.0);
    }
    let missing: Vec<(String, String)> = translated
        .iter()
        .filter(|p| gold.lookup(&p.source_w1, &p.source_w2).is_none())
        .map(|p| (p.source_w1.clone(), p.source_w2.clone()))
        .collect();
    if !missing.is_empty() {
        return Err(TranslateError::MissingGoldEntries(missing));
    }
    let mut credit = 0.0;
    for pair in translated {
        let (gold_w1, gold_w2) = gold
            .lookup(&pair.source_w1, &pair.source_w2)
            .expect("checked above");
        let m1 = normalize(&pair.target_w1) == *gold_w1;
        let m2 = normalize(&pair.target_w2) == *gold_w2;
        credit += match mode {
            AccuracyMode::StrictPair => {
                if m1 && m2 {
                    1.0
                } else {
                    0.0
                }
            }
            AccuracyMode::PerWord => 0.5 * (m1 as u8 as f64) + 0.5 * (m2 as u8 as f64),
        };
    }
    Ok(credit / translated.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goldsets::WordPair;

    fn lexicon(entries: &[(&str, &str)]) -> Backend {
        Backend::Lexicon(
            entries
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        )
    }

    fn goldset(pairs: &[(&str, &str)]) -> GoldSet {
        GoldSet {
            dataset: DatasetId::Mc,
            lang: "xx".into(),
            pairs: pairs
                .iter()
                .map(|(a, b)| WordPair {
                    w1: a.to_string(),
                    w2: b.to_string(),
                    human_score: 1.0,
                })
                .collect(),
            scale: (0.0, 4.0),
        }
    }

    #[test]
    fn identity_backend_normalizes() {
        let t = Translator::new(Backend::Identity, "en", "en");
        let pair = t.translate_pair("Auto", " Fahrt ").unwrap();
        assert_eq!(pair.target_w1, "auto");
        assert_eq!(pair.target_w2, "fahrt");
        assert!(!pair.cache_hit);
    }

    #[test]
    fn lexicon_backend_translates_by_lookup() {
        let t = Translator::new(lexicon(&[("chien", "dog"), ("chat", "cat")]), "fr", "en");
        let pair = t.translate_pair("chien", "chat").unwrap();
        assert_eq!((pair.target_w1.as_str(), pair.target_w2.as_str()), ("dog", "cat"));
    }

    #[test]
    fn lexicon_miss_is_typed() {
        let t = Translator::new(lexicon(&[("chien", "dog")]), "fr", "en");
        assert!(matches!(
            t.translate_pair("chien", "oiseau"),
            Err(TranslateError::LexiconMiss { .. })
        ));
    }

    #[test]
    fn empty_input_is_rejected() {
        let t = Translator::new(Backend::Identity, "en", "en");
        assert!(matches!(
            t.translate_pair("", "x"),
            Err(TranslateError::EmptyInput)
        ));
    }

    #[test]
    fn second_call_hits_cache_without_backend_calls() {
        let t = Translator::new(lexicon(&[("a", "x"), ("b", "y")]), "fr", "en");
        let first = t.translate_pair("a", "b").unwrap();
        assert!(!first.cache_hit);
        assert_eq!(t.backend_calls(), 1);
        let second = t.translate_pair("a", "b").unwrap();
        assert!(second.cache_hit);
        assert_eq!(t.backend_calls(), 1);
        assert_eq!(
            (first.target_w1, first.target_w2),
            (second.target_w1, second.target_w2)
        );
    }

    #[test]
    fn cache_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cache_path = dir.path().join("cache.tsv");
        {
            let t = Translator::new(lexicon(&[("a", "x"), ("b", "y")]), "fr", "en")
                .with_cache_file(&cache_path)
                .unwrap();
            t.translate_pair("a", "b").unwrap();
            assert_eq!(t.backend_calls(), 1);
        }
        // A fresh translator with an empty lexicon still answers from cache.
        let t2 = Translator::new(lexicon(&[]), "fr", "en")
            .with_cache_file(&cache_path)
            .unwrap();
        let pair = t2.translate_pair("a", "b").unwrap();
        assert!(pair.cache_hit);
        assert_eq!(pair.target_w1, "x");
        assert_eq!(t2.backend_calls(), 0);
    }

    #[test]
    fn batch_collects_failures_without_aborting() {
        let t = Translator::new(lexicon(&[("a", "x"), ("b", "y"), ("d", "w")]), "fr", "en");
        let gs = goldset(&[("a", "b"), ("a", "d"), ("a", "c"), ("b", "d"), ("b", "b")]);
        let outcome = batch_translate(&gs, &t, 1);
        assert_eq!(outcome.results.len(), 4);
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].index, 2);
        // Order preserved.
        let indices: Vec<usize> = outcome.results.iter().map(|(i, _)| *i).collect();
        assert_eq!(indices, vec![0, 1, 3, 4]);
    }

    #[test]
    fn all_cached_batch_makes_no_backend_calls() {
        let t = Translator::new(lexicon(&[("a", "x"), ("b", "y")]), "fr", "en");
        let gs = goldset(&[("a", "b"), ("b", "a")]);
        batch_translate(&gs, &t, 1);
        let calls_after_first = t.backend_calls();
        let outcome = batch_translate(&gs, &t, 1);
        assert_eq!(t.backend_calls(), calls_after_first);
        assert!(outcome.results.iter().all(|(_, p)| p.cache_hit));
    }

    #[test]
    fn rerun_after_failure_retries_only_failed_pairs() {
        let gs = goldset(&[("a", "b"), ("a", "c")]);
        let dir = tempfile::tempdir().unwrap();
        let cache_path = dir.path().join("cache.tsv");
        {
            let t = Translator::new(lexicon(&[("a", "x"), ("b", "y")]), "fr", "en")
                .with_cache_file(&cache_path)
                .unwrap();
            let outcome = batch_translate(&gs, &t, 1);
            assert_eq!(outcome.failures.len(), 1);
        }
        // Second run with a fixed lexicon: the cached pair is not re-requested.
        let t = Translator::new(lexicon(&[("a", "x"), ("b", "y"), ("c", "z")]), "fr", "en")
            .with_cache_file(&cache_path)
            .unwrap();
        let outcome = batch_translate(&gs, &t, 1);
        assert!(outcome.failures.is_empty());
        assert_eq!(t.backend_calls(), 1); // only the previously failed pair
    }

    #[test]
    fn concurrent_batch_preserves_order() {
        let entries: Vec<(String, String)> = (0..40)
            .map(|i| (format!("s{i}"), format!("t{i}")))
            .collect();
        let refs: Vec<(&str, &str)> = entries
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let t = Translator::new(lexicon(&refs), "fr", "en");
        let pair_words: Vec<(String, String)> = (0..20)
            .map(|i| (format!("s{}", 2 * i), format!("s{}", 2 * i + 1)))
            .collect();
        let pair_refs: Vec<(&str, &str)> = pair_words
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let gs = goldset(&pair_refs);
        let outcome = batch_translate(&gs, &t, 8);
        assert_eq!(outcome.results.len(), 20);
        for (slot, (i, pair)) in outcome.results.iter().enumerate() {
            assert_eq!(slot, *i);
            assert_eq!(pair.target_w1, format!("t{}", 2 * i));
        }
    }

    #[test]
    fn accuracy_counts_strict_pairs() {
        let gold = GoldTranslationSet::from_entries(
            DatasetId::Mc,
            "fr",
            (0..4).map(|i| {
                (
                    (format!("a{i}"), format!("b{i}")),
                    (format!("x{i}"), format!("y{i}")),
                )
            }),
        );
        let make = |i: usize, t1: &str, t2: &str| TranslatedPair {
            source_w1: format!("a{i}"),
            source_w2: format!("b{i}"),
            source_lang: "fr".into(),
            target_w1: t1.into(),
            target_w2: t2.into(),
            target_lang: "en".into(),
            backend: "lexicon".into(),
            cache_hit: false,
            unix_time: 0,
        };
        let translated = vec![
            make(0, "x0", "y0"),   // correct
            make(1, "x1", "wrong"), // half correct
            make(2, "x2", "y2"),   // correct
            make(3, "no", "no"),   // wrong
        ];
        let strict = translation_accuracy(&translated, &gold, AccuracyMode::StrictPair).unwrap();
        assert_eq!(strict, 0.5);
        let per_word = translation_accuracy(&translated, &gold, AccuracyMode::PerWord).unwrap();
        assert_eq!(per_word, 0.625);
    }

    #[test]
    fn accuracy_of_gold_against_itself_is_one() {
        let gold = GoldTranslationSet::from_entries(
            DatasetId::Mc,
            "fr",
            vec![(("un".into(), "deux".into()), ("one".into(), "two".into()))],
        );
        let translated = vec![TranslatedPair {
            source_w1: "un".into(),
            source_w2: "deux".into(),
            source_lang: "fr".into(),
            target_w1: "one".into(),
            target_w2: "two".into(),
            target_lang: "en".into(),
            backend: "lexicon".into(),
            cache_hit: false,
            unix_time: 0,
        }];
        assert_eq!(
            translation_accuracy(&translated, &gold, AccuracyMode::StrictPair).unwrap(),
            1.0
        );
    }

    #[test]
    fn missing_gold_entry_lists_pairs() {
        let gold = GoldTranslationSet::from_entries(DatasetId::Mc, "fr", vec![]);
        let translated = vec![TranslatedPair {
            source_w1: "un".into(),
            source_w2: "deux".into(),
            source_lang: "fr".into(),
            target_w1: "one".into(),
            target_w2: "two".into(),
            target_lang: "en".into(),
            backend: "lexicon".into(),
            cache_hit: false,
            unix_time: 0,
        }];
        match translation_accuracy(&translated, &gold, AccuracyMode::StrictPair) {
            Err(TranslateError::MissingGoldEntries(pairs)) => {
                assert_eq!(pairs, vec![("un".to_string(), "deux".to_string())]);
            }
            other => panic!("expected missing-gold error, got {other:?}"),
        }
    }

    // Minimal in-test HTTP server speaking just enough of the protocol for
    // the backend contract.
    fn spawn_test_server(
        responses: Vec<(u16, String)>,
    ) -> (String, std::thread::JoinHandle<usize>) {
        use std::io::Read;
        use std::net::TcpListener;
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let mut served = 0;
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = [0u8; 4096];
                let mut read = 0;
                // Read until the end of the JSON body (single small request).
                loop {
                    let n = stream.read(&mut buf[read..]).unwrap();
                    read += n;
                    let text = String::from_utf8_lossy(&buf[..read]);
                    if let Some(header_end) = text.find("\r\n\r\n") {
                        let content_len = text
                            .lines()
                            .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().unwrap()))
                            .unwrap_or(0);
                        if read >= header_end + 4 + content_len {
                            break;
                        }
                    }
                    if n == 0 {
                        break;
                    }
                }
                let reason = if status == 200 { "OK" } else { "Error" };
                let response = format!(
                    "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(response.as_bytes()).unwrap();
                served += 1;
            }
            served
        });
        (format!("http://{addr}/translate"), handle)
    }

    #[test]
    fn http_backend_joint_request_parses_pair() {
        let (endpoint, handle) = spawn_test_server(vec![(
            200,
            r#"{"translatedText": "Dog, Cat"}"#.to_string(),
        )]);
        let backend = Backend::Http(HttpBackend::new(HttpBackendConfig {
            endpoint,
            timeout_ms: 2000,
            retries: 1,
            backoff_ms: 1,
        }));
        let t = Translator::new(backend, "fr", "en");
        let pair = t.translate_pair("chien", "chat").unwrap();
        assert_eq!(pair.target_w1, "dog");
        assert_eq!(pair.target_w2, "cat");
        assert_eq!(handle.join().unwrap(), 1);
    }

    #[test]
    fn http_backend_retries_then_succeeds() {
        let (endpoint, handle) = spawn_test_server(vec![
            (500, r#"{"error": "transient"}"#.to_string()),
            (200, r#"{"translatedText": "dog, cat"}"#.to_string()),
        ]);
        let backend = Backend::Http(HttpBackend::new(HttpBackendConfig {
            endpoint,
            timeout_ms: 2000,
            retries: 3,
            backoff_ms: 1,
        }));
        let t = Translator::new(backend, "fr", "en");
        let pair = t.translate_pair("chien", "chat").unwrap();
        assert_eq!(pair.target_w1, "dog");
        assert_eq!(handle.join().unwrap(), 2);
    }

    #[test]
    fn http_backend_gives_up_after_retries() {
        let (endpoint, handle) = spawn_test_server(vec![
            (500, "{}".to_string()),
            (500, "{}".to_string()),
        ]);
        let backend = Backend::Http(HttpBackend::new(HttpBackendConfig {
            endpoint,
            timeout_ms: 2000,
            retries: 2,
            backoff_ms: 1,
        }));
        let t = Translator::new(backend, "fr", "en");
        assert!(matches!(
            t.translate_pair("chien", "chat"),
            Err(TranslateError::BackendUnreachable { attempts: 2, .. })
        ));
        handle.join().unwrap();
    }

    #[test]
    fn http_response_without_two_words_is_malformed() {
        let (endpoint, handle) = spawn_test_server(vec![(
            200,
            r#"{"translatedText": "dogcat"}"#.to_string(),
        )]);
        let backend = Backend::Http(HttpBackend::new(HttpBackendConfig {
            endpoint,
            timeout_ms: 2000,
            retries: 1,
            backoff_ms: 1,
        }));
        let t = Translator::new(backend, "fr", "en");
        assert!(matches!(
            t.translate_pair("chien", "chat"),
            Err(TranslateError::MalformedResponse(_))
        ));
        handle.join().unwrap();
    }
}
