//! Explicit semantic analysis: a word is a sparse TF-IDF vector over the
//! documents ("concepts") of the training corpus. The whole document is the
//! context window.

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSource, Preprocessor, Vocabulary};
use crate::vecspace::SparseModel;

use super::{invalid_param, TrainError, TrainResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsaParams {
    /// Keep at most this many concepts per word vector.
    pub concept_cap: usize,
    /// Additive smoothing applied to both sides of the IDF ratio:
    /// `idf = ln((N + s) / (df + s))`.
    pub idf_smoothing: f64,
    /// Words in fewer documents than this get an empty vector.
    pub min_doc_freq: u32,
}

impl Default for EsaParams {
    fn default() -> Self {
        EsaParams {
            concept_cap: 1500,
            idf_smoothing: 0.0,
            min_doc_freq: 1,
        }
    }
}

/// Train a sparse TF-IDF concept model.
///
/// `weight(w, d) = tf(w, d) * ln((N + s) / (df(w) + s))` with raw term counts
/// as `tf`. Each word keeps its `concept_cap` heaviest concepts; ties at the
/// cutoff prefer the lower document id. A word present in every document has
/// zero IDF and ends up with an empty vector, which downstream lookup treats
/// as out-of-vocabulary.
pub fn train_esa(
    source: &dyn CorpusSource,
    pre: &Preprocessor,
    vocab: &Vocabulary,
    params: &EsaParams,
) -> TrainResult<SparseModel> {
    if params.concept_cap == 0 {
        return Err(invalid_param("concept_cap", "must be at least 1"));
    }
    if vocab.is_empty() {
        return Err(TrainError::EmptyVocabulary);
    }

    let mut postings: Vec<Vec<(u32, u32)>> = vec![Vec::new(); vocab.len()]; // (doc, tf)
    let mut doc_freq: Vec<u32> = vec![0; vocab.len()];
    let mut n_docs = 0u32;
    let mut doc_tf: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();

    for doc in source.documents()? {
        let doc = doc?;
        let doc_id = n_docs;
        n_docs += 1;
        doc_tf.clear();
        for token in pre.tokens(&doc.text) {
            if let Some(id) = vocab.id(&token) {
                *doc_tf.entry(id).or_insert(0) += 1;
            }
        }
        for (&word, &tf) in doc_tf.iter() {
            postings[word as usize].push((doc_id, tf));
        }
        for &word in doc_tf.keys() {
            doc_freq[word as usize] += 1;
        }
    }
    if n_docs == 0 {
        return Err(TrainError::EmptyCorpus);
    }

    let s = params.idf_smoothing;
    let mut vectors: Vec<Vec<(u32, f64)>> = Vec::with_capacity(vocab.len());
    for word in 0..vocab.len() {
        let df = doc_freq[word];
        if df < params.min_doc_freq {
            vectors.push(Vec::new());
            continue;
        }
        let idf = ((n_docs as f64 + s) / (df as f64 + s)).ln();
        if idf <= 0.0 {
            vectors.push(Vec::new());
            continue;
        }
        let mut entries: Vec<(u32, f64)> = postings[word]
            .iter()
            .map(|&(doc, tf)| (doc, tf as f64 * idf))
            .collect();
        if entries.len() > params.concept_cap {
            entries.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .expect("tf-idf weights are finite")
                    .then_with(|| a.0.cmp(&b.0))
            });
            entries.truncate(params.concept_cap);
        }
        // Postings arrive in document order; SparseModel re-sorts by concept.
        vectors.push(entries);
    }

    let labels: Vec<String> = (0..n_docs).map(|d| d.to_string()).collect();
    Ok(SparseModel::new(
        vocab.clone(),
        labels,
        vectors,
        params.concept_cap,
        pre.config().clone(),
    )?)
}
