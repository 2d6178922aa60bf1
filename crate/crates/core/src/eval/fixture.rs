//! Fixture of published per-cell results, used to reproduce the derived
//! tables and headline aggregates without any training.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::goldsets::DatasetId;
use crate::vecspace::ModelKind;

use super::experiment::{
    EvalResult, ExperimentReport, OovPolicy, SizePoint, Strategy,
};
use super::Result;

type CellGrid = BTreeMap<DatasetId, BTreeMap<ModelKind, BTreeMap<String, f64>>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublishedSizeCorrelation {
    pub unique_tokens: f64,
    pub tokens: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublishedModelDiff {
    pub abs: f64,
    pub pct: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublishedHeadlines {
    pub overall_pct_improvement: f64,
    pub w2v_mt_overall_avg: f64,
    pub per_dataset_pct: BTreeMap<DatasetId, f64>,
    pub per_model_pct: BTreeMap<ModelKind, f64>,
    pub native_lang_avg: BTreeMap<String, f64>,
    pub mt_best_model: ModelKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublishedDerived {
    pub size_correlation: BTreeMap<ModelKind, BTreeMap<DatasetId, PublishedSizeCorrelation>>,
    pub table5_diff: BTreeMap<DatasetId, BTreeMap<ModelKind, PublishedModelDiff>>,
    pub table6_relative_diff: CellGrid,
    pub headlines: PublishedHeadlines,
}

/// The published result tables: raw per-cell inputs plus the derived values
/// they imply, kept for cross-checking the report engine.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaperTables {
    pub reference_lang: String,
    pub languages: Vec<String>,
    pub corpus_size_millions: BTreeMap<String, SizePoint>,
    pub translation_accuracy: BTreeMap<DatasetId, BTreeMap<String, f64>>,
    pub native_spearman: CellGrid,
    pub mt_spearman: CellGrid,
    pub published: PublishedDerived,
}

pub fn load_paper_tables(path: &Path) -> Result<PaperTables> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn grid_to_cells(grid: &CellGrid, strategy: Strategy, n_pairs_of: impl Fn(DatasetId) -> usize) -> Vec<EvalResult> {
    let mut cells = Vec::new();
    for (&dataset, models) in grid {
        for (&model, langs) in models {
            for (lang, &rho) in langs {
                cells.push(EvalResult {
                    dataset,
                    lang: lang.clone(),
                    model,
                    strategy,
                    rho: Some(rho),
                    n_pairs: n_pairs_of(dataset),
                    n_oov: 0,
                    n_failed_translations: 0,
                    oov_policy: OovPolicy::Skip,
                    low_coverage: false,
                });
            }
        }
    }
    cells
}

impl PaperTables {
    /// The language-specific results as a report.
    pub fn native_report(&self) -> ExperimentReport {
        let mut report = ExperimentReport::from_cells(
            self.languages.clone(),
            grid_to_cells(&self.native_spearman, Strategy::Native, |d| {
                d.canonical_count()
            }),
        );
        report.corpus_stats = self.corpus_size_millions.clone();
        report
    }

    /// The translation-mediated results as a report.
    pub fn mt_report(&self) -> ExperimentReport {
        let mut report = ExperimentReport::from_cells(
            self.languages.clone(),
            grid_to_cells(&self.mt_spearman, Strategy::Mt, |d| d.canonical_count()),
        );
        report.corpus_stats = self.corpus_size_millions.clone();
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_path() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures/paper_tables.json")
    }

    #[test]
    fn fixture_loads_and_has_full_grids() {
        let tables = load_paper_tables(&fixture_path()).unwrap();
        assert_eq!(tables.languages.len(), 11);
        assert_eq!(tables.reference_lang, "en");
        for dataset in DatasetId::ALL {
            let native = &tables.native_spearman[&dataset];
            let mt = &tables.mt_spearman[&dataset];
            for kind in ModelKind::ALL {
                assert_eq!(native[&kind].len(), 11, "{dataset}/{kind} native");
                assert_eq!(mt[&kind].len(), 10, "{dataset}/{kind} mt");
            }
        }
        assert_eq!(tables.corpus_size_millions.len(), 11);
        for dataset in DatasetId::ALL {
            assert_eq!(tables.translation_accuracy[&dataset].len(), 10);
        }
    }

    #[test]
    fn reports_expose_fixture_cells() {
        let tables = load_paper_tables(&fixture_path()).unwrap();
        let native = tables.native_report();
        let cell = native
            .cell(DatasetId::Mc, ModelKind::W2v, "en", Strategy::Native)
            .unwrap();
        assert_eq!(cell.rho, Some(0.84));
        let mt = tables.mt_report();
        let cell = mt
            .cell(DatasetId::Mc, ModelKind::W2v, "pt", Strategy::Mt)
            .unwrap();
        assert_eq!(cell.rho, Some(0.76));
    }
}
