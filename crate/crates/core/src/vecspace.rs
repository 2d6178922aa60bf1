//! Embedding spaces shared by all four model families: dense matrices for
//! LSA/W2V/GloVe, sparse concept vectors for ESA, cosine similarity, and
//! model persistence (compact binary plus the common text interchange format).

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{PreprocessConfig, Preprocessor, Vocabulary};

pub type VecspaceResult<T> = Result<T, VecspaceError>;

#[derive(Debug, Error)]
pub enum VecspaceError {
    #[error("similarity is undefined for a zero vector")]
    UndefinedSimilarity,
    #[error("vectors have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("word '{0}' is not in the vocabulary")]
    UnknownWord(String),
    #[error("non-finite value in model vectors (word id {word_id})")]
    NonFinite { word_id: u32 },
    #[error("negative weight in sparse vector (word id {word_id})")]
    NegativeWeight { word_id: u32 },
    #[error("sparse vector exceeds concept cap (word id {word_id}: {len} > {cap})")]
    CapExceeded { word_id: u32, len: usize, cap: usize },
    #[error("sparse vector references unknown concept id {concept} (word id {word_id})")]
    BadConcept { word_id: u32, concept: u32 },
    #[error("cannot open model file {path}: {source}")]
    Open {
        path: PathBuf,
        source: io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("model file is truncated")]
    Truncated,
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u16),
    #[error("model file checksum mismatch (file corrupted)")]
    ChecksumMismatch,
    #[error("expected a {expected} model but the file holds a {found} model")]
    LayoutMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("parse error in text model file at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Which of the four model families produced an embedding space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Esa,
    Lsa,
    W2v,
    Glove,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Esa, ModelKind::Lsa, ModelKind::W2v, ModelKind::Glove];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Esa => "esa",
            ModelKind::Lsa => "lsa",
            ModelKind::W2v => "w2v",
            ModelKind::Glove => "glove",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s.to_ascii_lowercase().as_str() {
            "esa" => Some(ModelKind::Esa),
            "lsa" => Some(ModelKind::Lsa),
            "w2v" | "word2vec" => Some(ModelKind::W2v),
            "glove" => Some(ModelKind::Glove),
            _ => None,
        }
    }

    fn tag(&self) -> u8 {
        match self {
            ModelKind::Esa => 0,
            ModelKind::Lsa => 1,
            ModelKind::W2v => 2,
            ModelKind::Glove => 3,
        }
    }

    fn from_tag(tag: u8) -> Option<ModelKind> {
        match tag {
            0 => Some(ModelKind::Esa),
            1 => Some(ModelKind::Lsa),
            2 => Some(ModelKind::W2v),
            3 => Some(ModelKind::Glove),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A cosine similarity value, always finite and clamped to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    /// Clamp against rounding excursions; NaN is rejected.
    pub fn new(value: f64) -> VecspaceResult<Self> {
        if value.is_nan() {
            return Err(VecspaceError::UndefinedSimilarity);
        }
        Ok(SimilarityScore(value.clamp(-1.0, 1.0)))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Cosine similarity of two equal-dimension dense vectors.
///
/// A zero vector has no direction, so the result is a distinguished error
/// rather than 0.
pub fn cosine(u: &[f64], v: &[f64]) -> VecspaceResult<SimilarityScore> {
    if u.len() != v.len() {
        return Err(VecspaceError::DimensionMismatch(u.len(), v.len()));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(VecspaceError::UndefinedSimilarity);
    }
    SimilarityScore::new(dot / (nu.sqrt() * nv.sqrt()))
}

/// Cosine similarity of two sparse vectors sorted by concept id.
pub fn cosine_sparse(u: &[(u32, f64)], v: &[(u32, f64)]) -> VecspaceResult<SimilarityScore> {
    let nu: f64 = u.iter().map(|(_, w)| w * w).sum();
    let nv: f64 = v.iter().map(|(_, w)| w * w).sum();
    if nu == 0.0 || nv == 0.0 {
        return Err(VecspaceError::UndefinedSimilarity);
    }
    let mut dot = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < u.len() && j < v.len() {
        match u[i].0.cmp(&v[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += u[i].1 * v[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    SimilarityScore::new(dot / (nu.sqrt() * nv.sqrt()))
}

/// Dense embedding space: one `dim`-length row per vocabulary word.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseModel {
    kind: ModelKind,
    vocab: Vocabulary,
    dim: usize,
    vectors: Vec<f64>,
    preprocess: PreprocessConfig,
}

impl DenseModel {
    pub fn new(
        kind: ModelKind,
        vocab: Vocabulary,
        dim: usize,
        vectors: Vec<f64>,
        preprocess: PreprocessConfig,
    ) -> VecspaceResult<Self> {
        assert_eq!(vectors.len(), vocab.len() * dim, "vector matrix shape mismatch");
        for (i, row) in vectors.chunks(dim.max(1)).enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(VecspaceError::NonFinite { word_id: i as u32 });
            }
        }
        Ok(DenseModel {
            kind,
            vocab,
            dim,
            vectors,
            preprocess,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn preprocess(&self) -> &PreprocessConfig {
        &self.preprocess
    }

    pub fn vector(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.vectors[start..start + self.dim]
    }
}

/// Sparse concept-vector space: each word maps concept ids (documents of the
/// training corpus) to nonnegative weights, at most `cap` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseModel {
    vocab: Vocabulary,
    concept_labels: Vec<String>,
    vectors: Vec<Vec<(u32, f64)>>,
    cap: usize,
    preprocess: PreprocessConfig,
}

impl SparseModel {
    pub fn new(
        vocab: Vocabulary,
        concept_labels: Vec<String>,
        mut vectors: Vec<Vec<(u32, f64)>>,
        cap: usize,
        preprocess: PreprocessConfig,
    ) -> VecspaceResult<Self> {
        assert_eq!(vectors.len(), vocab.len(), "one sparse vector per word required");
        let n_concepts = concept_labels.len() as u32;
        for (i, vec) in vectors.iter_mut().enumerate() {
            let word_id = i as u32;
            if vec.len() > cap {
                return Err(VecspaceError::CapExceeded {
                    word_id,
                    len: vec.len(),
                    cap,
                });
            }
            for &(concept, weight) in vec.iter() {
                if concept >= n_concepts {
                    return Err(VecspaceError::BadConcept { word_id, concept });
                }
                if !weight.is_finite() {
                    return Err(VecspaceError::NonFinite { word_id });
                }
                if weight < 0.0 {
                    return Err(VecspaceError::NegativeWeight { word_id });
                }
            }
            vec.sort_by_key(|&(c, _)| c);
        }
        Ok(SparseModel {
            vocab,
            concept_labels,
            vectors,
            cap,
            preprocess,
        })
    }

    pub fn kind(&self) -> ModelKind {
        ModelKind::Esa
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn concept_labels(&self) -> &[String] {
        &self.concept_labels
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn preprocess(&self) -> &PreprocessConfig {
        &self.preprocess
    }

    /// The word's concept vector, sorted by concept id.
    pub fn vector(&self, id: u32) -> &[(u32, f64)] {
        &self.vectors[id as usize]
    }
}

/// A trained model of either layout.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Dense(DenseModel),
    Sparse(SparseModel),
}

/// Why a word pair could not be scored: one or both words are missing from
/// the model (or have an empty vector, which carries no signal either).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OovReport {
    pub w1_missing: bool,
    pub w2_missing: bool,
}

impl OovReport {
    pub fn missing_words<'a>(&self, w1: &'a str, w2: &'a str) -> Vec<&'a str> {
        let mut out = Vec::new();
        if self.w1_missing {
            out.push(w1);
        }
        if self.w2_missing {
            out.push(w2);
        }
        out
    }
}

/// Outcome of a word-pair similarity query. OOV is a value, not a failure:
/// evaluation policy decides what to do with it.
#[derive(Debug, Clone, PartialEq)]
pub enum WordSimilarity {
    Score(SimilarityScore),
    Oov(OovReport),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Dense(m) => m.kind(),
            Model::Sparse(m) => m.kind(),
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            Model::Dense(m) => m.vocab(),
            Model::Sparse(m) => m.vocab(),
        }
    }

    /// Dense dimensionality, or the concept-space size for sparse models.
    pub fn dim(&self) -> usize {
        match self {
            Model::Dense(m) => m.dim(),
            Model::Sparse(m) => m.concept_labels().len(),
        }
    }

    pub fn preprocess(&self) -> &PreprocessConfig {
        match self {
            Model::Dense(m) => m.preprocess(),
            Model::Sparse(m) => m.preprocess(),
        }
    }

    /// Look up a surface word after running it through the model's own
    /// preprocessing. Words that preprocess to anything but a single known
    /// token (stopwords, multi-word strings) are out of vocabulary; so are
    /// words whose stored vector is empty or all-zero.
    pub fn lookup(&self, pre: &Preprocessor, word: &str) -> Option<u32> {
        let tokens = pre.tokens(word);
        if tokens.len() != 1 {
            return None;
        }
        let id = self.vocab().id(&tokens[0])?;
        let nonzero = match self {
            Model::Dense(m) => m.vector(id).iter().any(|&x| x != 0.0),
            Model::Sparse(m) => m.vector(id).iter().any(|&(_, w)| w != 0.0),
        };
        nonzero.then_some(id)
    }

    fn cosine_ids(&self, a: u32, b: u32) -> VecspaceResult<SimilarityScore> {
        match self {
            Model::Dense(m) => cosine(m.vector(a), m.vector(b)),
            Model::Sparse(m) => cosine_sparse(m.vector(a), m.vector(b)),
        }
    }

    /// Cosine similarity of two surface words.
    pub fn similarity(&self, pre: &Preprocessor, w1: &str, w2: &str) -> VecspaceResult<WordSimilarity> {
        let id1 = self.lookup(pre, w1);
        let id2 = self.lookup(pre, w2);
        match (id1, id2) {
            (Some(a), Some(b)) => Ok(WordSimilarity::Score(self.cosine_ids(a, b)?)),
            (a, b) => Ok(WordSimilarity::Oov(OovReport {
                w1_missing: a.is_none(),
                w2_missing: b.is_none(),
            })),
        }
    }

    /// Top-`k` neighbors of `word` by cosine, excluding the word itself.
    /// Ties are broken by vocabulary id, so results are deterministic.
    pub fn nearest_neighbors(
        &self,
        pre: &Preprocessor,
        word: &str,
        k: usize,
    ) -> VecspaceResult<Vec<(String, f64)>> {
        let query = self
            .lookup(pre, word)
            .ok_or_else(|| VecspaceError::UnknownWord(word.to_string()))?;
        let mut scored: Vec<(u32, f64)> = Vec::new();
        for id in 0..self.vocab().len() as u32 {
            if id == query {
                continue;
            }
            if let Ok(score) = self.cosine_ids(query, id) {
                scored.push((id, score.value()));
            }
        }
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("similarity scores are never NaN")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(id, s)| (self.vocab().word(id).to_string(), s))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"DSMB";
const FORMAT_VERSION: u16 = 1;
const LAYOUT_DENSE: u8 = 0;
const LAYOUT_SPARSE: u8 = 1;

struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> HashingWriter<W> {
    fn new(inner: W) -> Self {
        HashingWriter {
            inner,
            hasher: Sha256::new(),
        }
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

struct HashingReader<R: Read> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> HashingReader<R> {
    fn new(inner: R) -> Self {
        HashingReader {
            inner,
            hasher: Sha256::new(),
        }
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8]) -> VecspaceResult<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            VecspaceError::Truncated
        } else {
            VecspaceError::Io(e)
        }
    })
}

fn read_u8<R: Read>(r: &mut R) -> VecspaceResult<u8> {
    let mut b = [0u8; 1];
    read_exact_or_truncated(r, &mut b)?;
    Ok(b[0])
}

fn read_u16<R: Read>(r: &mut R) -> VecspaceResult<u16> {
    let mut b = [0u8; 2];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> VecspaceResult<u32> {
    let mut b = [0u8; 4];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> VecspaceResult<u64> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> VecspaceResult<f64> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> VecspaceResult<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    read_exact_or_truncated(r, &mut buf)?;
    String::from_utf8(buf).map_err(|_| VecspaceError::Parse {
        line: 0,
        message: "invalid UTF-8 string in binary model".into(),
    })
}

fn write_vocab<W: Write>(w: &mut W, vocab: &Vocabulary) -> io::Result<()> {
    write_u32(w, vocab.len() as u32)?;
    write_u64(w, vocab.min_count())?;
    for id in 0..vocab.len() as u32 {
        write_str(w, vocab.word(id))?;
        write_u64(w, vocab.count(id))?;
    }
    Ok(())
}

fn read_vocab<R: Read>(r: &mut R) -> VecspaceResult<Vocabulary> {
    let len = read_u32(r)? as usize;
    let min_count = read_u64(r)?;
    let mut entries = Vec::with_capacity(len);
    for _ in 0..len {
        let word = read_str(r)?;
        let count = read_u64(r)?;
        entries.push((word, count));
    }
    Ok(Vocabulary::from_entries(entries, min_count))
}

fn write_config<W: Write>(w: &mut W, cfg: &PreprocessConfig) -> io::Result<()> {
    let json = serde_json::to_string(cfg).expect("preprocess config serializes");
    write_str(w, &json)
}

fn read_config<R: Read>(r: &mut R) -> VecspaceResult<PreprocessConfig> {
    let json = read_str(r)?;
    serde_json::from_str(&json).map_err(|e| VecspaceError::Parse {
        line: 0,
        message: format!("invalid preprocess config block: {e}"),
    })
}

impl Model {
    /// Write the compact binary format: magic, version, kind and layout tags,
    /// preprocess config, vocabulary, weights, trailing SHA-256 checksum.
    pub fn save_binary(&self, path: &Path) -> VecspaceResult<()> {
        let file = File::create(path).map_err(|source| VecspaceError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = HashingWriter::new(BufWriter::new(file));
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        match self {
            Model::Dense(m) => {
                w.write_all(&[m.kind().tag(), LAYOUT_DENSE])?;
                write_config(&mut w, m.preprocess())?;
                write_vocab(&mut w, m.vocab())?;
                write_u32(&mut w, m.dim() as u32)?;
                for v in &m.vectors {
                    write_f64(&mut w, *v)?;
                }
            }
            Model::Sparse(m) => {
                w.write_all(&[m.kind().tag(), LAYOUT_SPARSE])?;
                write_config(&mut w, m.preprocess())?;
                write_vocab(&mut w, m.vocab())?;
                write_u32(&mut w, m.concept_labels.len() as u32)?;
                for label in &m.concept_labels {
                    write_str(&mut w, label)?;
                }
                write_u32(&mut w, m.cap as u32)?;
                for vec in &m.vectors {
                    write_u32(&mut w, vec.len() as u32)?;
                    for &(concept, weight) in vec {
                        write_u32(&mut w, concept)?;
                        write_f64(&mut w, weight)?;
                    }
                }
            }
        }
        let digest = w.hasher.clone().finalize();
        w.inner.write_all(&digest)?;
        w.inner.flush()?;
        Ok(())
    }

    /// Load the binary format, verifying version and checksum.
    pub fn load_binary(path: &Path) -> VecspaceResult<Model> {
        let file = File::open(path).map_err(|source| VecspaceError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut r = HashingReader::new(BufReader::new(file));
        let mut magic = [0u8; 4];
        read_exact_or_truncated(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(VecspaceError::BadMagic);
        }
        let version = read_u16(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(VecspaceError::UnsupportedVersion(version));
        }
        let kind = ModelKind::from_tag(read_u8(&mut r)?).ok_or(VecspaceError::BadMagic)?;
        let layout = read_u8(&mut r)?;
        let model = match layout {
            LAYOUT_DENSE => {
                let cfg = read_config(&mut r)?;
                let vocab = read_vocab(&mut r)?;
                let dim = read_u32(&mut r)? as usize;
                let mut vectors = vec![0.0f64; vocab.len() * dim];
                for v in vectors.iter_mut() {
                    *v = read_f64(&mut r)?;
                }
                Model::Dense(DenseModel::new(kind, vocab, dim, vectors, cfg)?)
            }
            LAYOUT_SPARSE => {
                let cfg = read_config(&mut r)?;
                let vocab = read_vocab(&mut r)?;
                let n_concepts = read_u32(&mut r)? as usize;
                let mut labels = Vec::with_capacity(n_concepts);
                for _ in 0..n_concepts {
                    labels.push(read_str(&mut r)?);
                }
                let cap = read_u32(&mut r)? as usize;
                let mut vectors = Vec::with_capacity(vocab.len());
                for _ in 0..vocab.len() {
                    let k = read_u32(&mut r)? as usize;
                    let mut vec = Vec::with_capacity(k);
                    for _ in 0..k {
                        let concept = read_u32(&mut r)?;
                        let weight = read_f64(&mut r)?;
                        vec.push((concept, weight));
                    }
                    vectors.push(vec);
                }
                Model::Sparse(SparseModel::new(vocab, labels, vectors, cap, cfg)?)
            }
            _ => return Err(VecspaceError::BadMagic),
        };
        let expected = r.hasher.clone().finalize();
        let mut stored = [0u8; 32];
        read_exact_or_truncated(&mut r, &mut stored)?;
        if stored != expected[..] {
            return Err(VecspaceError::ChecksumMismatch);
        }
        Ok(model)
    }

    /// Load the binary format and require a dense layout.
    pub fn load_binary_dense(path: &Path) -> VecspaceResult<DenseModel> {
        match Model::load_binary(path)? {
            Model::Dense(m) => Ok(m),
            Model::Sparse(_) => Err(VecspaceError::LayoutMismatch {
                expected: "dense",
                found: "sparse",
            }),
        }
    }

    /// Load the binary format and require a sparse layout.
    pub fn load_binary_sparse(path: &Path) -> VecspaceResult<SparseModel> {
        match Model::load_binary(path)? {
            Model::Sparse(m) => Ok(m),
            Model::Dense(_) => Err(VecspaceError::LayoutMismatch {
                expected: "sparse",
                found: "dense",
            }),
        }
    }

    /// Write the text interchange format. Dense models use the common
    /// `V d` header plus one `word v1 … vd` line per word; sparse models use
    /// a `V C` header, `C` concept-label lines, then `word k (concept,weight)×k`
    /// lines. The text formats carry no frequencies or preprocessing config.
    pub fn save_text(&self, path: &Path) -> VecspaceResult<()> {
        let file = File::create(path).map_err(|source| VecspaceError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        match self {
            Model::Dense(m) => {
                writeln!(w, "{} {}", m.vocab.len(), m.dim)?;
                for id in 0..m.vocab.len() as u32 {
                    write!(w, "{}", m.vocab.word(id))?;
                    for v in m.vector(id) {
                        write!(w, " {v}")?;
                    }
                    writeln!(w)?;
                }
            }
            Model::Sparse(m) => {
                writeln!(w, "{} {}", m.vocab.len(), m.concept_labels.len())?;
                for label in &m.concept_labels {
                    writeln!(w, "{label}")?;
                }
                for id in 0..m.vocab.len() as u32 {
                    let vec = m.vector(id);
                    write!(w, "{} {}", m.vocab.word(id), vec.len())?;
                    for &(c, weight) in vec {
                        write!(w, " {c} {weight}")?;
                    }
                    writeln!(w)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_err<T: fmt::Display>(line: usize, message: T) -> VecspaceError {
    VecspaceError::Parse {
        line,
        message: message.to_string(),
    }
}

impl DenseModel {
    /// Read the `V d` text format. Frequencies are unknown in this format,
    /// so vocabulary counts load as zero.
    pub fn load_text(path: &Path, kind: ModelKind) -> VecspaceResult<DenseModel> {
        let file = File::open(path).map_err(|source| VecspaceError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file"))??;
        let mut parts = header.split_whitespace();
        let v: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "header must be `V d`"))?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "header must be `V d`"))?;
        if parts.next().is_some() {
            return Err(parse_err(1, "header must be exactly `V d`"));
        }
        let mut entries = Vec::with_capacity(v);
        let mut vectors = Vec::with_capacity(v * dim);
        for i in 0..v {
            let line_no = i + 2;
            let line = lines
                .next()
                .ok_or_else(|| parse_err(line_no, "fewer vector lines than header declares"))??;
            let mut fields = line.split_whitespace();
            let word = fields
                .next()
                .ok_or_else(|| parse_err(line_no, "missing word"))?;
            let mut row = Vec::with_capacity(dim);
            for f in fields {
                let value: f64 = f
                    .parse()
                    .map_err(|e| parse_err(line_no, format!("bad float '{f}': {e}")))?;
                row.push(value);
            }
            if row.len() != dim {
                return Err(parse_err(
                    line_no,
                    format!("expected {dim} values, found {}", row.len()),
                ));
            }
            entries.push((word.to_string(), 0));
            vectors.extend(row);
        }
        DenseModel::new(
            kind,
            Vocabulary::from_entries(entries, 0),
            dim,
            vectors,
            PreprocessConfig::default(),
        )
    }
}

impl SparseModel {
    /// Read the sparse text format written by [`Model::save_text`].
    pub fn load_text(path: &Path) -> VecspaceResult<SparseModel> {
        let file = File::open(path).map_err(|source| VecspaceError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file"))??;
        let mut parts = header.split_whitespace();
        let v: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "header must be `V C`"))?;
        let n_concepts: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "header must be `V C`"))?;
        let mut labels = Vec::with_capacity(n_concepts);
        for i in 0..n_concepts {
            let line = lines
                .next()
                .ok_or_else(|| parse_err(i + 2, "fewer concept labels than header declares"))??;
            labels.push(line);
        }
        let mut entries = Vec::with_capacity(v);
        let mut vectors = Vec::with_capacity(v);
        let mut cap = 0usize;
        for i in 0..v {
            let line_no = n_concepts + i + 2;
            let line = lines
                .next()
                .ok_or_else(|| parse_err(line_no, "fewer vector lines than header declares"))??;
            let mut fields = line.split_whitespace();
            let word = fields
                .next()
                .ok_or_else(|| parse_err(line_no, "missing word"))?;
            let k: usize = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(line_no, "missing nonzero count"))?;
            let mut vec = Vec::with_capacity(k);
            for _ in 0..k {
                let concept: u32 = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "truncated (concept,weight) list"))?;
                let weight: f64 = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "truncated (concept,weight) list"))?;
                vec.push((concept, weight));
            }
            if fields.next().is_some() {
                return Err(parse_err(line_no, "trailing fields after (concept,weight) list"));
            }
            cap = cap.max(vec.len());
            entries.push((word.to_string(), 0));
            vectors.push(vec);
        }
        SparseModel::new(
            Vocabulary::from_entries(entries, 0),
            labels,
            vectors,
            cap.max(1),
            PreprocessConfig::default(),
        )
    }
}
