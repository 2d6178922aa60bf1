//! Evaluation: rank correlation against the gold standards, the
//! native-vs-translated experiment grid, and the derived difference and
//! headline reports.

use std::path::PathBuf;

use thiserror::Error;

use crate::goldsets::GoldError;
use crate::translate::TranslateError;
use crate::vecspace::VecspaceError;

mod diff;
mod experiment;
mod fixture;
mod render;
mod stats;

pub use diff::{
    diff_report, headline_aggregates, round2, DiffCell, DiffReport, HeadlineSummary, ModelDiff,
};
pub use experiment::{
    corpus_size_correlation, evaluate, model_path, run_experiment, EvalResult, ExperimentConfig,
    ExperimentReport, OovPolicy, SizeCorrelation, SizeIndicator, SizePoint, Strategy,
    TranslatorSpec,
};
pub use fixture::{load_paper_tables, PaperTables, PublishedHeadlines};
pub use render::{
    render_accuracy_table, render_diff_table, render_scores_csv, render_scores_table,
    render_size_correlation_table,
};
pub use stats::{pearson, spearman};

/// Result alias for this module.
pub type Result<T, E = EvalError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("input lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("correlation is undefined for constant input")]
    ConstantInput,
    #[error("reports are not congruent: {0}")]
    GridMismatch(String),
    #[error("model file missing: {0}")]
    MissingModel(PathBuf),
    #[error(transparent)]
    Gold(#[from] GoldError),
    #[error(transparent)]
    Vecspace(#[from] VecspaceError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid fixture or report JSON: {0}")]
    Json(#[from] serde_json::Error),
}
