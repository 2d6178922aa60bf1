//! Windowed co-occurrence counting, shared by the GloVe and LSA trainers.
//!
//! Counts accumulate in a hash map and spill sorted shards to temporary
//! files when the map grows past a limit; shards are merged into a CSR
//! matrix at the end, so peak memory stays bounded while the final matrix
//! is dense enough to iterate cheaply.

use std::collections::{BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSource, Preprocessor, Vocabulary};

use super::{invalid_param, TrainError, TrainResult};

/// How a co-occurrence at distance `d` is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceWeighting {
    /// Every pair inside the window counts 1.
    #[default]
    Uniform,
    /// A pair at distance `d` counts `1/d` (the GloVe convention).
    InverseDistance,
}

/// Sparse symmetric co-occurrence counts in CSR layout, rows sorted by
/// column id.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocMatrix {
    vocab_len: usize,
    window: usize,
    weighting: DistanceWeighting,
    row_offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CoocMatrix {
    pub fn vocab_len(&self) -> usize {
        self.vocab_len
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn weighting(&self) -> DistanceWeighting {
        self.weighting
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column ids and values of one row.
    pub fn row(&self, row: u32) -> (&[u32], &[f64]) {
        let lo = self.row_offsets[row as usize];
        let hi = self.row_offsets[row as usize + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    /// Sum over one row.
    pub fn row_sum(&self, row: u32) -> f64 {
        self.row(row).1.iter().sum()
    }

    /// A single cell (0 when absent).
    pub fn get(&self, row: u32, col: u32) -> f64 {
        let (cols, vals) = self.row(row);
        match cols.binary_search(&col) {
            Ok(i) => vals[i],
            Err(_) => 0.0,
        }
    }

    /// Iterate `(row, col, value)` over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.vocab_len as u32).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Entry by flat index into the stored-entry order.
    pub fn entry(&self, idx: usize) -> (u32, u32, f64) {
        let row = match self.row_offsets.binary_search(&idx) {
            Ok(mut r) => {
                // Skip empty rows that share the same offset.
                while self.row_offsets[r + 1] == idx {
                    r += 1;
                }
                r
            }
            Err(r) => r - 1,
        };
        (row as u32, self.cols[idx], self.vals[idx])
    }

    /// Replace the stored values, keeping the sparsity pattern.
    pub(crate) fn with_values(&self, vals: Vec<f64>) -> CoocMatrix {
        assert_eq!(vals.len(), self.vals.len());
        CoocMatrix {
            vals,
            ..self.clone()
        }
    }

    pub(crate) fn from_sorted_entries(
        vocab_len: usize,
        window: usize,
        weighting: DistanceWeighting,
        entries: impl Iterator<Item = (u64, f64)>,
    ) -> CoocMatrix {
        let mut row_offsets = vec![0usize; vocab_len + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut current_row = 0usize;
        for (key, val) in entries {
            let row = (key >> 32) as usize;
            let col = (key & 0xffff_ffff) as u32;
            while current_row < row {
                current_row += 1;
                row_offsets[current_row] = cols.len();
            }
            cols.push(col);
            vals.push(val);
        }
        while current_row < vocab_len {
            current_row += 1;
            row_offsets[current_row] = cols.len();
        }
        CoocMatrix {
            vocab_len,
            window,
            weighting,
            row_offsets,
            cols,
            vals,
        }
    }
}

const SPILL_LIMIT: usize = 8_000_000;

struct Shard {
    reader: BufReader<File>,
    remaining: u64,
}

impl Shard {
    fn next_entry(&mut self) -> std::io::Result<Option<(u64, f64)>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        self.remaining -= 1;
        let mut buf = [0u8; 16];
        self.reader.read_exact(&mut buf)?;
        let key = u64::from_le_bytes(buf[..8].try_into().unwrap());
        let val = f64::from_le_bytes(buf[8..].try_into().unwrap());
        Ok(Some((key, val)))
    }
}

fn spill_shard(map: &mut HashMap<u64, f64>) -> std::io::Result<Shard> {
    let mut entries: Vec<(u64, f64)> = map.drain().collect();
    entries.sort_unstable_by_key(|&(k, _)| k);
    let mut file = tempfile::tempfile()?;
    {
        let mut w = BufWriter::new(&mut file);
        for (k, v) in &entries {
            w.write_all(&k.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
    }
    use std::io::Seek;
    file.seek(std::io::SeekFrom::Start(0))?;
    Ok(Shard {
        reader: BufReader::new(file),
        remaining: entries.len() as u64,
    })
}

struct HeapItem {
    key: u64,
    val: f64,
    shard: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.shard == other.shard
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap, we need the smallest key first.
        other
            .key
            .cmp(&self.key)
            .then_with(|| other.shard.cmp(&self.shard))
    }
}

/// Count weighted co-occurrences over a corpus.
///
/// Tokens outside the vocabulary are dropped before distances are measured,
/// so the window spans surviving tokens. Pairs never cross a document
/// boundary. Both directions of each pair are stored, so the matrix is
/// symmetric.
pub fn build_cooc(
    source: &dyn CorpusSource,
    pre: &Preprocessor,
    vocab: &Vocabulary,
    window: usize,
    weighting: DistanceWeighting,
) -> TrainResult<CoocMatrix> {
    if window == 0 {
        return Err(invalid_param("window", "must be at least 1"));
    }
    let mut map: HashMap<u64, f64> = HashMap::new();
    let mut shards: Vec<Shard> = Vec::new();

    for doc in source.documents()? {
        let doc = doc?;
        let ids: Vec<u32> = pre
            .tokens(&doc.text)
            .into_iter()
            .filter_map(|t| vocab.id(&t))
            .collect();
        for i in 0..ids.len() {
            let hi = (i + window).min(ids.len() - 1);
            for j in (i + 1)..=hi {
                let d = (j - i) as f64;
                let w = match weighting {
                    DistanceWeighting::Uniform => 1.0,
                    DistanceWeighting::InverseDistance => 1.0 / d,
                };
                let a = ids[i] as u64;
                let b = ids[j] as u64;
                *map.entry((a << 32) | b).or_insert(0.0) += w;
                *map.entry((b << 32) | a).or_insert(0.0) += w;
            }
        }
        if map.len() >= SPILL_LIMIT {
            shards.push(spill_shard(&mut map).map_err(TrainError::Io)?);
        }
    }

    if shards.is_empty() {
        let mut entries: Vec<(u64, f64)> = map.drain().collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        return Ok(CoocMatrix::from_sorted_entries(
            vocab.len(),
            window,
            weighting,
            entries.into_iter(),
        ));
    }

    if !map.is_empty() {
        shards.push(spill_shard(&mut map).map_err(TrainError::Io)?);
    }

    // K-way merge of sorted shards, summing duplicate keys.
    let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
    for (i, shard) in shards.iter_mut().enumerate() {
        if let Some((key, val)) = shard.next_entry().map_err(TrainError::Io)? {
            heap.push(HeapItem { key, val, shard: i });
        }
    }
    let mut merged: Vec<(u64, f64)> = Vec::new();
    while let Some(item) = heap.pop() {
        if let Some((key, val)) = shards[item.shard].next_entry().map_err(TrainError::Io)? {
            heap.push(HeapItem {
                key,
                val,
                shard: item.shard,
            });
        }
        match merged.last_mut() {
            Some(last) if last.0 == item.key => last.1 += item.val,
            _ => merged.push((item.key, item.val)),
        }
    }
    Ok(CoocMatrix::from_sorted_entries(
        vocab.len(),
        window,
        weighting,
        merged.into_iter(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MemCorpus, PreprocessConfig};

    fn setup(docs: &[&str]) -> (MemCorpus, Preprocessor, Vocabulary) {
        let corpus = MemCorpus::new(docs.to_vec());
        let pre = Preprocessor::new(PreprocessConfig::default());
        let vocab = crate::corpus::build_vocabulary(&corpus, &pre, 1).unwrap();
        (corpus, pre, vocab)
    }

    fn cell(m: &CoocMatrix, vocab: &Vocabulary, a: &str, b: &str) -> f64 {
        m.get(vocab.id(a).unwrap(), vocab.id(b).unwrap())
    }

    #[test]
    fn window_one_uniform_counts_adjacent_pairs() {
        let (corpus, pre, vocab) = setup(&["a b c"]);
        let m = build_cooc(&corpus, &pre, &vocab, 1, DistanceWeighting::Uniform).unwrap();
        assert_eq!(cell(&m, &vocab, "a", "b"), 1.0);
        assert_eq!(cell(&m, &vocab, "b", "a"), 1.0);
        assert_eq!(cell(&m, &vocab, "b", "c"), 1.0);
        assert_eq!(cell(&m, &vocab, "c", "b"), 1.0);
        assert_eq!(cell(&m, &vocab, "a", "c"), 0.0);
        assert_eq!(m.nnz(), 4);
    }

    #[test]
    fn inverse_distance_weights_by_one_over_d() {
        let (corpus, pre, vocab) = setup(&["a b c"]);
        let m = build_cooc(&corpus, &pre, &vocab, 2, DistanceWeighting::InverseDistance).unwrap();
        assert_eq!(cell(&m, &vocab, "a", "c"), 0.5);
        assert_eq!(cell(&m, &vocab, "a", "b"), 1.0);
    }

    #[test]
    fn document_boundaries_are_never_crossed() {
        // Two documents vs their concatenation: the boundary-crossing pairs
        // are exactly the difference. Hand enumeration for window 2:
        // concatenated [a,b,c,d,e,f] adds (b,d),(c,d),(c,e) over split docs
        // [a,b,c] + [d,e,f].
        let (two_docs, pre, vocab) = setup(&["a b c", "d e f"]);
        let m_split = build_cooc(&two_docs, &pre, &vocab, 2, DistanceWeighting::Uniform).unwrap();
        let (one_doc, _, _) = setup(&["a b c d e f"]);
        let m_joined = build_cooc(&one_doc, &pre, &vocab, 2, DistanceWeighting::Uniform).unwrap();

        assert_eq!(cell(&m_split, &vocab, "c", "d"), 0.0);
        assert_eq!(cell(&m_split, &vocab, "b", "d"), 0.0);
        assert_eq!(cell(&m_split, &vocab, "c", "e"), 0.0);
        assert_eq!(cell(&m_joined, &vocab, "c", "d"), 1.0);
        assert_eq!(cell(&m_joined, &vocab, "b", "d"), 1.0);
        assert_eq!(cell(&m_joined, &vocab, "c", "e"), 1.0);
        // All within-document pairs agree.
        for a in ["a", "b", "c"] {
            for b in ["a", "b", "c"] {
                assert_eq!(cell(&m_split, &vocab, a, b), cell(&m_joined, &vocab, a, b));
            }
        }
    }

    #[test]
    fn larger_windows_never_decrease_cells() {
        let (corpus, pre, vocab) = setup(&["a b a c b a d", "c c a b d a"]);
        let small = build_cooc(&corpus, &pre, &vocab, 2, DistanceWeighting::Uniform).unwrap();
        let large = build_cooc(&corpus, &pre, &vocab, 5, DistanceWeighting::Uniform).unwrap();
        for a in 0..vocab.len() as u32 {
            for b in 0..vocab.len() as u32 {
                assert!(large.get(a, b) >= small.get(a, b));
            }
        }
    }

    #[test]
    fn matrix_is_symmetric() {
        let (corpus, pre, vocab) = setup(&["a b c a d b", "d c c a"]);
        let m = build_cooc(&corpus, &pre, &vocab, 3, DistanceWeighting::InverseDistance).unwrap();
        for a in 0..vocab.len() as u32 {
            for b in 0..vocab.len() as u32 {
                assert_eq!(m.get(a, b), m.get(b, a));
            }
        }
    }

    #[test]
    fn oov_tokens_are_dropped_before_distance() {
        let corpus = MemCorpus::new(["a zzz b"]);
        let pre = Preprocessor::new(PreprocessConfig::default());
        // Vocabulary without "zzz": a and b become adjacent.
        let small = MemCorpus::new(["a b a b"]);
        let vocab = crate::corpus::build_vocabulary(&small, &pre, 1).unwrap();
        let m = build_cooc(&corpus, &pre, &vocab, 1, DistanceWeighting::Uniform).unwrap();
        assert_eq!(cell(&m, &vocab, "a", "b"), 1.0);
    }

    #[test]
    fn entry_lookup_matches_iteration() {
        let (corpus, pre, vocab) = setup(&["a b c a d b e", "d c c a e b"]);
        let m = build_cooc(&corpus, &pre, &vocab, 3, DistanceWeighting::Uniform).unwrap();
        for (idx, (r, c, v)) in m.iter().enumerate() {
            assert_eq!(m.entry(idx), (r, c, v));
        }
    }
}
