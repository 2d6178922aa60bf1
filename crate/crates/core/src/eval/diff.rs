//! Native-vs-translated comparison: per-cell relative differences, per-model
//! average differences, and the headline aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::goldsets::DatasetId;
use crate::vecspace::ModelKind;

use super::experiment::{ExperimentReport, Strategy};
use super::{EvalError, Result};

/// One language cell compared across strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffCell {
    pub dataset: DatasetId,
    pub model: ModelKind,
    pub lang: String,
    pub native: f64,
    pub mt: f64,
    /// `(mt - native) / native`; `None` when the native score is 0.
    pub relative: Option<f64>,
}

/// Average difference of one (dataset, model) row over the aligned
/// languages. The absolute and percent differences are computed on the
/// two-decimal rounded averages, matching how such tables are published;
/// the unrounded averages are kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDiff {
    pub dataset: DatasetId,
    pub model: ModelKind,
    pub native_avg: f64,
    pub mt_avg: f64,
    pub native_avg_rounded: f64,
    pub mt_avg_rounded: f64,
    pub abs_diff: f64,
    pub pct_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DiffReport {
    /// Languages aligned across the two reports, in native-report order.
    pub languages: Vec<String>,
    pub cells: Vec<DiffCell>,
    pub model_diffs: Vec<ModelDiff>,
}

/// Round to two decimals, half away from zero. Values within a hair of a
/// midpoint (as happens when averaging published two-decimal cells) get a
/// deterministic nudge so the result does not depend on accumulated
/// floating-point noise.
pub fn round2(x: f64) -> f64 {
    ((x * 100.0) + 1e-6 * x.signum()).round() / 100.0
}

impl DiffReport {
    pub fn cell(&self, dataset: DatasetId, model: ModelKind, lang: &str) -> Option<&DiffCell> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.model == model && c.lang == lang)
    }

    pub fn model_diff(&self, dataset: DatasetId, model: ModelKind) -> Option<&ModelDiff> {
        self.model_diffs
            .iter()
            .find(|d| d.dataset == dataset && d.model == model)
    }

    pub fn datasets(&self) -> Vec<DatasetId> {
        let mut out: Vec<DatasetId> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.dataset) {
                out.push(c.dataset);
            }
        }
        out.sort();
        out
    }

    pub fn models(&self) -> Vec<ModelKind> {
        let mut out: Vec<ModelKind> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.model) {
                out.push(c.model);
            }
        }
        out
    }

    /// Mean of the per-cell relative differences of one (dataset, model) row.
    pub fn row_mean_relative(&self, dataset: DatasetId, model: ModelKind) -> Option<f64> {
        let values: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.dataset == dataset && c.model == model)
            .filter_map(|c| c.relative)
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

/// Compare two congruent reports cell by cell.
///
/// The reports must cover the same datasets and models; languages are
/// aligned per row (a language contributes only where both strategies have
/// a defined correlation).
pub fn diff_report(native: &ExperimentReport, mt: &ExperimentReport) -> Result<DiffReport> {
    let native = native.only_strategy(Strategy::Native);
    let mt = mt.only_strategy(Strategy::Mt);
    if native.datasets() != mt.datasets() {
        return Err(EvalError::GridMismatch(format!(
            "datasets differ: {:?} vs {:?}",
            native.datasets(),
            mt.datasets()
        )));
    }
    if native.models() != mt.models() {
        return Err(EvalError::GridMismatch(format!(
            "models differ: {:?} vs {:?}",
            native.models(),
            mt.models()
        )));
    }
    if native.cells.is_empty() {
        return Err(EvalError::GridMismatch("empty reports".into()));
    }

    let mut languages: Vec<String> = Vec::new();
    let mut cells = Vec::new();
    let mut model_diffs = Vec::new();
    for dataset in native.datasets() {
        for model in native.models() {
            let mut native_scores = Vec::new();
            let mut mt_scores = Vec::new();
            for lang in &native.languages {
                let native_cell = native
                    .cell(dataset, model, lang, Strategy::Native)
                    .and_then(|c| c.rho);
                let mt_cell = mt.cell(dataset, model, lang, Strategy::Mt).and_then(|c| c.rho);
                let (Some(native_rho), Some(mt_rho)) = (native_cell, mt_cell) else {
                    continue;
                };
                if !languages.contains(lang) {
                    languages.push(lang.clone());
                }
                native_scores.push(native_rho);
                mt_scores.push(mt_rho);
                cells.push(DiffCell {
                    dataset,
                    model,
                    lang: lang.clone(),
                    native: native_rho,
                    mt: mt_rho,
                    relative: (native_rho != 0.0).then(|| (mt_rho - native_rho) / native_rho),
                });
            }
            if native_scores.is_empty() {
                return Err(EvalError::GridMismatch(format!(
                    "no aligned languages for {dataset}/{model}"
                )));
            }
            let native_avg = native_scores.iter().sum::<f64>() / native_scores.len() as f64;
            let mt_avg = mt_scores.iter().sum::<f64>() / mt_scores.len() as f64;
            let native_avg_rounded = round2(native_avg);
            let mt_avg_rounded = round2(mt_avg);
            let abs_diff = mt_avg_rounded - native_avg_rounded;
            model_diffs.push(ModelDiff {
                dataset,
                model,
                native_avg,
                mt_avg,
                native_avg_rounded,
                mt_avg_rounded,
                abs_diff,
                pct_diff: 100.0 * abs_diff / native_avg_rounded,
            });
        }
    }
    Ok(DiffReport {
        languages,
        cells,
        model_diffs,
    })
}

/// Headline aggregates of a difference report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineSummary {
    /// Mean of the per-model percent differences (one per dataset × model).
    pub overall_pct: f64,
    /// Mean of the per-cell relative differences of each dataset, ×100.
    pub per_dataset_pct: BTreeMap<DatasetId, f64>,
    /// Mean of each model's percent differences across datasets.
    pub per_model_pct: BTreeMap<ModelKind, f64>,
    /// Mean of the per-cell relative differences of each language, ×100.
    pub per_lang_pct: BTreeMap<String, f64>,
    /// Each model's translated-strategy average across datasets (mean of the
    /// rounded per-dataset averages).
    pub mt_model_overall: BTreeMap<ModelKind, f64>,
    pub best_mt_model: Option<ModelKind>,
    /// False when the grid is smaller than 3 datasets × 4 models.
    pub complete: bool,
}

/// Aggregate a difference report into its headline numbers.
pub fn headline_aggregates(diff: &DiffReport) -> HeadlineSummary {
    let datasets = diff.datasets();
    let models = diff.models();

    let pcts: Vec<f64> = diff.model_diffs.iter().map(|d| d.pct_diff).collect();
    let overall_pct = pcts.iter().sum::<f64>() / pcts.len().max(1) as f64;

    let mut per_dataset_pct = BTreeMap::new();
    for &dataset in &datasets {
        let rels: Vec<f64> = diff
            .cells
            .iter()
            .filter(|c| c.dataset == dataset)
            .filter_map(|c| c.relative)
            .collect();
        if !rels.is_empty() {
            per_dataset_pct.insert(dataset, 100.0 * rels.iter().sum::<f64>() / rels.len() as f64);
        }
    }

    let mut per_model_pct = BTreeMap::new();
    let mut mt_model_overall = BTreeMap::new();
    for &model in &models {
        let rows: Vec<&ModelDiff> = diff
            .model_diffs
            .iter()
            .filter(|d| d.model == model)
            .collect();
        if rows.is_empty() {
            continue;
        }
        per_model_pct.insert(
            model,
            rows.iter().map(|d| d.pct_diff).sum::<f64>() / rows.len() as f64,
        );
        mt_model_overall.insert(
            model,
            rows.iter().map(|d| d.mt_avg_rounded).sum::<f64>() / rows.len() as f64,
        );
    }

    let mut per_lang_pct = BTreeMap::new();
    for lang in &diff.languages {
        let rels: Vec<f64> = diff
            .cells
            .iter()
            .filter(|c| &c.lang == lang)
            .filter_map(|c| c.relative)
            .collect();
        if !rels.is_empty() {
            per_lang_pct.insert(
                lang.clone(),
                100.0 * rels.iter().sum::<f64>() / rels.len() as f64,
            );
        }
    }

    let best_mt_model = mt_model_overall
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("averages are finite"))
        .map(|(&k, _)| k);

    HeadlineSummary {
        overall_pct,
        per_dataset_pct,
        per_model_pct,
        per_lang_pct,
        mt_model_overall,
        best_mt_model,
        complete: datasets.len() == 3 && models.len() == 4,
    }
}
