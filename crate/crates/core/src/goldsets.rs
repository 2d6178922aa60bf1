//! Word-pair gold standards: MC (30 pairs), RG (65 pairs) and WS-353
//! (353 pairs), in English and translated editions.
//!
//! Files are UTF-8 TSV, `w1<TAB>w2<TAB>score`, with optional `#` comment
//! lines. Human scores stay on each dataset's native scale; rank correlation
//! does not care about the scale.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type GoldResult<T> = Result<T, GoldError>;

#[derive(Debug, Error)]
pub enum GoldError {
    #[error("cannot open gold set file {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("i/o error reading gold set: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: score '{text}' is not a number")]
    BadScore { line: usize, text: String },
    #[error("{dataset} has {expected} pairs but the file holds {found}")]
    CountMismatch {
        dataset: DatasetId,
        expected: usize,
        found: usize,
    },
}

/// The three benchmark datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DatasetId {
    Mc,
    Rg,
    Ws353,
}

impl DatasetId {
    pub const ALL: [DatasetId; 3] = [DatasetId::Mc, DatasetId::Rg, DatasetId::Ws353];

    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetId::Mc => "mc",
            DatasetId::Rg => "rg",
            DatasetId::Ws353 => "ws353",
        }
    }

    pub fn parse(s: &str) -> Option<DatasetId> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Some(DatasetId::Mc),
            "rg" => Some(DatasetId::Rg),
            "ws353" | "ws-353" | "wordsim353" => Some(DatasetId::Ws353),
            _ => None,
        }
    }

    /// The published pair count; loading rejects files of any other size.
    pub fn canonical_count(&self) -> usize {
        match self {
            DatasetId::Mc => 30,
            DatasetId::Rg => 65,
            DatasetId::Ws353 => 353,
        }
    }

    /// Score scale (min, max) of the judgments.
    pub fn scale(&self) -> (f64, f64) {
        match self {
            DatasetId::Mc | DatasetId::Rg => (0.0, 4.0),
            DatasetId::Ws353 => (0.0, 10.0),
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One judged pair on the dataset's native scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordPair {
    pub w1: String,
    pub w2: String,
    pub human_score: f64,
}

/// A loaded dataset in one language.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldSet {
    pub dataset: DatasetId,
    pub lang: String,
    pub pairs: Vec<WordPair>,
    pub scale: (f64, f64),
}

/// Load a gold set, checking format and the canonical pair count.
/// Content-level problems (range, duplicates) are left to [`validate_gold`].
pub fn load_gold(dataset: DatasetId, lang: &str, path: &Path) -> GoldResult<GoldSet> {
    let file = File::open(path).map_err(|source| GoldError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(GoldError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        let score: f64 = cols[2].trim().parse().map_err(|_| GoldError::BadScore {
            line: line_no,
            text: cols[2].to_string(),
        })?;
        pairs.push(WordPair {
            w1: cols[0].trim().to_string(),
            w2: cols[1].trim().to_string(),
            human_score: score,
        });
    }
    if pairs.len() != dataset.canonical_count() {
        return Err(GoldError::CountMismatch {
            dataset,
            expected: dataset.canonical_count(),
            found: pairs.len(),
        });
    }
    Ok(GoldSet {
        dataset,
        lang: lang.to_string(),
        pairs,
        scale: dataset.scale(),
    })
}

/// A problem found by [`validate_gold`]. Pair indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoldFinding {
    OutOfScale { index: usize, score: f64 },
    DuplicatePair { index: usize, first_index: usize },
    EmptyWord { index: usize },
}

/// Check scores against the scale, report duplicate unordered pairs and
/// empty words. A valid set produces an empty report.
pub fn validate_gold(set: &GoldSet) -> Vec<GoldFinding> {
    let mut findings = Vec::new();
    let (lo, hi) = set.scale;
    let mut seen: std::collections::HashMap<(String, String), usize> = std::collections::HashMap::new();
    for (i, pair) in set.pairs.iter().enumerate() {
        if pair.w1.is_empty() || pair.w2.is_empty() {
            findings.push(GoldFinding::EmptyWord { index: i });
        }
        if !(lo..=hi).contains(&pair.human_score) {
            findings.push(GoldFinding::OutOfScale {
                index: i,
                score: pair.human_score,
            });
        }
        let key = unordered_key(&pair.w1, &pair.w2);
        match seen.get(&key) {
            Some(&first) => findings.push(GoldFinding::DuplicatePair {
                index: i,
                first_index: first,
            }),
            None => {
                seen.insert(key, i);
            }
        }
    }
    findings
}

fn unordered_key(w1: &str, w2: &str) -> (String, String) {
    let a = w1.to_lowercase();
    let b = w2.to_lowercase();
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// True when every unordered pair of `subset` also occurs in `superset`.
pub fn is_pair_subset(subset: &GoldSet, superset: &GoldSet) -> bool {
    let sup: std::collections::HashSet<(String, String)> = superset
        .pairs
        .iter()
        .map(|p| unordered_key(&p.w1, &p.w2))
        .collect();
    subset
        .pairs
        .iter()
        .all(|p| sup.contains(&unordered_key(&p.w1, &p.w2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_pairs(pairs: &[(&str, &str, f64)]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for (w1, w2, s) in pairs {
            writeln!(f, "{w1}\t{w2}\t{s}").unwrap();
        }
        f
    }

    fn mc_sized(pairs: usize) -> Vec<(String, String, f64)> {
        (0..pairs)
            .map(|i| (format!("w{i}a"), format!("w{i}b"), (i % 5) as f64))
            .collect()
    }

    #[test]
    fn load_checks_canonical_count() {
        let rows = mc_sized(30);
        let refs: Vec<(&str, &str, f64)> = rows
            .iter()
            .map(|(a, b, s)| (a.as_str(), b.as_str(), *s))
            .collect();
        let f = write_pairs(&refs);
        let set = load_gold(DatasetId::Mc, "en", f.path()).unwrap();
        assert_eq!(set.pairs.len(), 30);
        assert_eq!(set.scale, (0.0, 4.0));

        let err = load_gold(DatasetId::Rg, "en", f.path()).err().unwrap();
        assert!(matches!(
            err,
            GoldError::CountMismatch {
                expected: 65,
                found: 30,
                ..
            }
        ));
    }

    #[test]
    fn pairs_keep_file_order() {
        let rows = mc_sized(30);
        let refs: Vec<(&str, &str, f64)> = rows
            .iter()
            .map(|(a, b, s)| (a.as_str(), b.as_str(), *s))
            .collect();
        let f = write_pairs(&refs);
        let set = load_gold(DatasetId::Mc, "en", f.path()).unwrap();
        for (i, p) in set.pairs.iter().enumerate() {
            assert_eq!(p.w1, format!("w{i}a"));
        }
        // Idempotent: loading twice yields the same set.
        assert_eq!(set, load_gold(DatasetId::Mc, "en", f.path()).unwrap());
    }

    #[test]
    fn two_column_line_reports_line_number() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\tb\t1.0").unwrap();
        writeln!(f, "c\td").unwrap();
        let err = load_gold(DatasetId::Mc, "en", f.path()).err().unwrap();
        assert!(matches!(err, GoldError::ColumnCount { line: 2, found: 2 }));
    }

    #[test]
    fn non_numeric_score_reports_line_number() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\tb\thigh").unwrap();
        let err = load_gold(DatasetId::Mc, "en", f.path()).err().unwrap();
        assert!(matches!(err, GoldError::BadScore { line: 1, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# header comment").unwrap();
        writeln!(f).unwrap();
        for (a, b, s) in mc_sized(30) {
            writeln!(f, "{a}\t{b}\t{s}").unwrap();
        }
        assert!(load_gold(DatasetId::Mc, "en", f.path()).is_ok());
    }

    #[test]
    fn validate_flags_duplicates_range_and_empty_words() {
        let mut rows = mc_sized(30);
        rows[4] = (rows[1].0.clone(), rows[1].1.clone(), 1.0); // duplicate of index 1
        rows[5].2 = 11.0; // out of the 0-4 scale
        rows[6].0 = String::new(); // empty word
        let refs: Vec<(&str, &str, f64)> = rows
            .iter()
            .map(|(a, b, s)| (a.as_str(), b.as_str(), *s))
            .collect();
        let f = write_pairs(&refs);
        let set = load_gold(DatasetId::Mc, "en", f.path()).unwrap();
        let findings = validate_gold(&set);
        assert_eq!(findings.len(), 3);
        assert!(findings
            .iter()
            .any(|f| matches!(f, GoldFinding::DuplicatePair { index: 4, first_index: 1 })));
        assert!(findings
            .iter()
            .any(|f| matches!(f, GoldFinding::OutOfScale { index: 5, .. })));
        assert!(findings
            .iter()
            .any(|f| matches!(f, GoldFinding::EmptyWord { index: 6 })));
    }

    #[test]
    fn duplicates_are_unordered() {
        let mut rows = mc_sized(30);
        rows[9] = (rows[2].1.clone(), rows[2].0.clone(), 3.0); // swapped duplicate
        let refs: Vec<(&str, &str, f64)> = rows
            .iter()
            .map(|(a, b, s)| (a.as_str(), b.as_str(), *s))
            .collect();
        let f = write_pairs(&refs);
        let set = load_gold(DatasetId::Mc, "en", f.path()).unwrap();
        assert_eq!(validate_gold(&set).len(), 1);
    }
}
