//! Word-pair evaluation of a model against a gold set, and the full
//! dataset × model × language × strategy experiment grid.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::goldsets::{load_gold, DatasetId, GoldSet};
use crate::translate::{Backend, HttpBackendConfig, Translator};
use crate::vecspace::{Model, ModelKind, WordSimilarity};
use crate::corpus::Preprocessor;

use super::stats::spearman;
use super::{EvalError, Result};

/// Whether a pair is scored in its own language or translated into the
/// reference language first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Native,
    Mt,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Native => "native",
            Strategy::Mt => "mt",
        }
    }
}

/// What to do with pairs the model cannot score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OovPolicy {
    /// Drop the pair from the correlation (coverage is reported).
    #[default]
    Skip,
    /// Score the pair 0.
    Zero,
}

/// One cell of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub dataset: DatasetId,
    pub lang: String,
    pub model: ModelKind,
    pub strategy: Strategy,
    /// Spearman correlation; `None` when undefined (constant ranks or fewer
    /// than 2 scored pairs).
    pub rho: Option<f64>,
    /// Pairs that entered the correlation.
    pub n_pairs: usize,
    /// Pairs the model could not score (missing words or empty vectors).
    pub n_oov: usize,
    /// Pairs lost to translation failures (counted like OOV by the policy).
    pub n_failed_translations: usize,
    pub oov_policy: OovPolicy,
    /// Set when more than half of the dataset was out of vocabulary.
    pub low_coverage: bool,
}

/// Score a gold set with a model.
///
/// With a translator, every pair is translated first (the MT-mediated
/// pipeline); the model is then expected to be in the translator's target
/// language. Without one, pairs are scored natively.
pub fn evaluate(
    model: &Model,
    goldset: &GoldSet,
    policy: OovPolicy,
    translator: Option<&Translator>,
) -> Result<EvalResult> {
    let pre = Preprocessor::new(model.preprocess().clone());
    let strategy = if translator.is_some() {
        Strategy::Mt
    } else {
        Strategy::Native
    };
    let mut human = Vec::new();
    let mut scores = Vec::new();
    let mut n_oov = 0usize;
    let mut n_failed = 0usize;

    for pair in &goldset.pairs {
        let (w1, w2) = match translator {
            None => (pair.w1.clone(), pair.w2.clone()),
            Some(t) => match t.translate_pair(&pair.w1, &pair.w2) {
                Ok(translated) => (translated.target_w1, translated.target_w2),
                Err(e) => {
                    log::debug!("translation failed for ({}, {}): {e}", pair.w1, pair.w2);
                    n_failed += 1;
                    n_oov += 1;
                    if policy == OovPolicy::Zero {
                        human.push(pair.human_score);
                        scores.push(0.0);
                    }
                    continue;
                }
            },
        };
        match model.similarity(&pre, &w1, &w2)? {
            WordSimilarity::Score(score) => {
                human.push(pair.human_score);
                scores.push(score.value());
            }
            WordSimilarity::Oov(_) => {
                n_oov += 1;
                if policy == OovPolicy::Zero {
                    human.push(pair.human_score);
                    scores.push(0.0);
                }
            }
        }
    }

    let rho = match spearman(&human, &scores) {
        Ok(r) => Some(r),
        Err(EvalError::ConstantInput) | Err(EvalError::TooFewPoints(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalResult {
        dataset: goldset.dataset,
        lang: goldset.lang.clone(),
        model: model.kind(),
        strategy,
        rho,
        n_pairs: human.len(),
        n_oov,
        n_failed_translations: n_failed,
        oov_policy: policy,
        low_coverage: 2 * n_oov > goldset.pairs.len(),
    })
}

/// Corpus size indicators carried alongside a report (unit-free; Pearson is
/// scale invariant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub unique_tokens: f64,
    pub tokens: f64,
}

/// How translators are constructed per language for the MT strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum TranslatorSpec {
    Identity,
    /// Per-language lexicon files `<dir>/<lang>.tsv`.
    Lexicon { dir: PathBuf },
    Http(HttpBackendConfig),
}

impl TranslatorSpec {
    pub fn build(
        &self,
        source_lang: &str,
        target_lang: &str,
        cache_dir: Option<&Path>,
    ) -> Result<Translator> {
        let backend = match self {
            TranslatorSpec::Identity => Backend::Identity,
            TranslatorSpec::Lexicon { dir } => {
                Backend::lexicon_from_file(&dir.join(format!("{source_lang}.tsv")))?
            }
            TranslatorSpec::Http(config) => {
                Backend::Http(crate::translate::HttpBackend::new(config.clone()))
            }
        };
        let translator = Translator::new(backend, source_lang, target_lang);
        match cache_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}-{source_lang}.tsv", translator.backend_tag()));
                Ok(translator.with_cache_file(&path)?)
            }
            None => Ok(translator),
        }
    }
}

/// Configuration of a full experiment run. Gold sets live at
/// `<data_dir>/<dataset>/<lang>.tsv`, models at
/// `<model_dir>/<kind>-<lang>.dsm`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub model_dir: PathBuf,
    #[serde(default = "default_reference_lang")]
    pub reference_lang: String,
    pub languages: Vec<String>,
    pub datasets: Vec<DatasetId>,
    pub models: Vec<ModelKind>,
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub oov_policy: OovPolicy,
    #[serde(default)]
    pub translator: Option<TranslatorSpec>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub corpus_stats: BTreeMap<String, SizePoint>,
}

fn default_reference_lang() -> String {
    "en".to_string()
}

/// Canonical model file location used by training and evaluation.
pub fn model_path(model_dir: &Path, kind: ModelKind, lang: &str) -> PathBuf {
    model_dir.join(format!("{kind}-{lang}.dsm"))
}

/// A grid cell that could not be computed, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingCell {
    pub dataset: DatasetId,
    pub lang: String,
    pub model: ModelKind,
    pub strategy: Strategy,
    pub reason: String,
}

/// The computed grid plus per-language corpus statistics.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentReport {
    pub languages: Vec<String>,
    pub cells: Vec<EvalResult>,
    pub missing: Vec<MissingCell>,
    #[serde(default)]
    pub corpus_stats: BTreeMap<String, SizePoint>,
}

impl ExperimentReport {
    pub fn from_cells(languages: Vec<String>, cells: Vec<EvalResult>) -> Self {
        ExperimentReport {
            languages,
            cells,
            missing: Vec::new(),
            corpus_stats: BTreeMap::new(),
        }
    }

    pub fn cell(
        &self,
        dataset: DatasetId,
        model: ModelKind,
        lang: &str,
        strategy: Strategy,
    ) -> Option<&EvalResult> {
        self.cells.iter().find(|c| {
            c.dataset == dataset && c.model == model && c.lang == lang && c.strategy == strategy
        })
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

    fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
        let collected: Vec<f64> = values.collect();
        if collected.is_empty() {
            None
        } else {
            Some(collected.iter().sum::<f64>() / collected.len() as f64)
        }
    }

    /// Unweighted mean correlation of one (dataset, model) row across its
    /// defined language cells.
    pub fn model_avg(
        &self,
        dataset: DatasetId,
        model: ModelKind,
        strategy: Strategy,
    ) -> Option<f64> {
        Self::mean(
            self.cells
                .iter()
                .filter(|c| c.dataset == dataset && c.model == model && c.strategy == strategy)
                .filter_map(|c| c.rho),
        )
    }

    /// Mean over every defined cell of one language.
    pub fn lang_avg(&self, lang: &str, strategy: Strategy) -> Option<f64> {
        Self::mean(
            self.cells
                .iter()
                .filter(|c| c.lang == lang && c.strategy == strategy)
                .filter_map(|c| c.rho),
        )
    }

    /// Mean of the model averages of one dataset.
    pub fn dataset_avg(&self, dataset: DatasetId, strategy: Strategy) -> Option<f64> {
        Self::mean(
            self.models()
                .into_iter()
                .filter_map(|m| self.model_avg(dataset, m, strategy)),
        )
    }

    /// Restrict to one strategy.
    pub fn only_strategy(&self, strategy: Strategy) -> ExperimentReport {
        ExperimentReport {
            languages: self.languages.clone(),
            cells: self
                .cells
                .iter()
                .filter(|c| c.strategy == strategy)
                .cloned()
                .collect(),
            missing: self
                .missing
                .iter()
                .filter(|m| m.strategy == strategy)
                .cloned()
                .collect(),
            corpus_stats: self.corpus_stats.clone(),
        }
    }
}

/// Run the configured grid. Missing model or dataset files mark cells absent
/// and the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cells = Vec::new();
    let mut missing = Vec::new();
    let mut model_cache: BTreeMap<(ModelKind, String), Option<Model>> = BTreeMap::new();
    let mut load_model = |kind: ModelKind, lang: &str| -> Option<Model> {
        model_cache
            .entry((kind, lang.to_string()))
            .or_insert_with(|| {
                let path = model_path(&config.model_dir, kind, lang);
                match Model::load_binary(&path) {
                    Ok(m) => Some(m),
                    Err(e) => {
                        log::warn!("cannot load model {}: {e}", path.display());
                        None
                    }
                }
            })
            .clone()
    };

    for &strategy in &config.strategies {
        for &dataset in &config.datasets {
            for lang in &config.languages {
                if strategy == Strategy::Mt && lang == &config.reference_lang {
                    continue; // the reference language has nothing to translate
                }
                let gold_path = config
                    .data_dir
                    .join(dataset.as_str())
                    .join(format!("{lang}.tsv"));
                let goldset = match load_gold(dataset, lang, &gold_path) {
                    Ok(g) => g,
                    Err(e) => {
                        for &model in &config.models {
                            missing.push(MissingCell {
                                dataset,
                                lang: lang.clone(),
                                model,
                                strategy,
                                reason: e.to_string(),
                            });
                        }
                        continue;
                    }
                };
                let translator = match strategy {
                    Strategy::Native => None,
                    Strategy::Mt => {
                        let spec = config.translator.as_ref().ok_or_else(|| {
                            EvalError::GridMismatch(
                                "mt strategy requested without a translator".into(),
                            )
                        })?;
                        match spec.build(lang, &config.reference_lang, config.cache_dir.as_deref())
                        {
                            Ok(t) => Some(t),
                            Err(e) => {
                                for &model in &config.models {
                                    missing.push(MissingCell {
                                        dataset,
                                        lang: lang.clone(),
                                        model,
                                        strategy,
                                        reason: e.to_string(),
                                    });
                                }
                                continue;
                            }
                        }
                    }
                };
                for &model_kind in &config.models {
                    let model_lang = match strategy {
                        Strategy::Native => lang.as_str(),
                        Strategy::Mt => config.reference_lang.as_str(),
                    };
                    let Some(model) = load_model(model_kind, model_lang) else {
                        missing.push(MissingCell {
                            dataset,
                            lang: lang.clone(),
                            model: model_kind,
                            strategy,
                            reason: format!(
                                "model file {} not loadable",
                                model_path(&config.model_dir, model_kind, model_lang).display()
                            ),
                        });
                        continue;
                    };
                    let mut cell =
                        evaluate(&model, &goldset, config.oov_policy, translator.as_ref())?;
                    // The dataset language, not the model language, names the cell.
                    cell.lang = lang.clone();
                    cells.push(cell);
                }
            }
        }
    }

    Ok(ExperimentReport {
        languages: config.languages.clone(),
        cells,
        missing,
        corpus_stats: config.corpus_stats.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeIndicator {
    Tokens,
    UniqueTokens,
}

/// Correlation between per-language scores and a corpus-size indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCorrelation {
    pub dataset: DatasetId,
    pub model: ModelKind,
    pub indicator: SizeIndicator,
    /// Pearson correlation across languages; `None` with fewer than 3 points.
    pub r: Option<f64>,
    pub n_points: usize,
}

/// Pearson correlation, per model and dataset, between the per-language
/// correlations of `report` and each corpus-size indicator.
pub fn corpus_size_correlation(
    report: &ExperimentReport,
    stats: &BTreeMap<String, SizePoint>,
) -> Vec<SizeCorrelation> {
    let mut out = Vec::new();
    for dataset in report.datasets() {
        for model in report.models() {
            for indicator in [SizeIndicator::UniqueTokens, SizeIndicator::Tokens] {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for cell in report.cells.iter().filter(|c| {
                    c.dataset == dataset && c.model == model && c.rho.is_some()
                }) {
                    if let Some(point) = stats.get(&cell.lang) {
                        xs.push(match indicator {
                            SizeIndicator::Tokens => point.tokens,
                            SizeIndicator::UniqueTokens => point.unique_tokens,
                        });
                        ys.push(cell.rho.expect("filtered to defined cells"));
                    }
                }
                let r = if xs.len() < 3 {
                    None
                } else {
                    super::stats::pearson(&xs, &ys).ok()
                };
                out.push(SizeCorrelation {
                    dataset,
                    model,
                    indicator,
                    r,
                    n_points: xs.len(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PreprocessConfig;
    use crate::corpus::Vocabulary;
    use crate::goldsets::WordPair;
    use crate::vecspace::DenseModel;

    fn toy_model(entries: &[(&str, [f64; 2])]) -> Model {
        let vocab = Vocabulary::from_entries(
            entries.iter().map(|(w, _)| (w.to_string(), 1)).collect(),
            1,
        );
        let vectors: Vec<f64> = entries.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        Model::Dense(
            DenseModel::new(
                ModelKind::W2v,
                vocab,
                2,
                vectors,
                PreprocessConfig::default(),
            )
            .unwrap(),
        )
    }

    fn goldset(pairs: &[(&str, &str, f64)]) -> GoldSet {
        GoldSet {
            dataset: DatasetId::Mc,
            lang: "en".into(),
            pairs: pairs
                .iter()
                .map(|(a, b, s)| WordPair {
                    w1: a.to_string(),
                    w2: b.to_string(),
                    human_score: *s,
                })
                .collect(),
            scale: (0.0, 4.0),
        }
    }

    #[test]
    fn skip_policy_drops_oov_pairs() {
        let model = toy_model(&[
            ("sun", [1.0, 0.0]),
            ("moon", [0.9, 0.1]),
            ("rock", [0.0, 1.0]),
        ]);
        let gs = goldset(&[
            ("sun", "moon", 3.8),
            ("sun", "rock", 1.0),
            ("sun", "unknown", 2.0),
            ("moon", "rock", 0.9),
        ]);
        let result = evaluate(&model, &gs, OovPolicy::Skip, None).unwrap();
        assert_eq!(result.n_pairs, 3);
        assert_eq!(result.n_oov, 1);
        assert!(!result.low_coverage);
        assert!(result.rho.is_some());
    }

    #[test]
    fn zero_policy_keeps_oov_pairs_with_zero_score() {
        let model = toy_model(&[("sun", [1.0, 0.0]), ("moon", [0.9, 0.1])]);
        let gs = goldset(&[
            ("sun", "moon", 3.8),
            ("sun", "zzz", 1.0),
            ("moon", "qqq", 0.5),
        ]);
        let result = evaluate(&model, &gs, OovPolicy::Zero, None).unwrap();
        assert_eq!(result.n_pairs, 3);
        assert_eq!(result.n_oov, 2);
        assert!(result.low_coverage); // 2 of 3 pairs OOV
    }

    #[test]
    fn constant_model_scores_make_rho_undefined() {
        // Both pairs score exactly 1.0 (identical vectors).
        let model = toy_model(&[
            ("a", [1.0, 0.0]),
            ("b", [1.0, 0.0]),
            ("c", [2.0, 0.0]),
        ]);
        let gs = goldset(&[("a", "b", 3.0), ("a", "c", 1.0)]);
        let result = evaluate(&model, &gs, OovPolicy::Skip, None).unwrap();
        assert_eq!(result.rho, None);
        assert_eq!(result.n_pairs, 2);
    }

    #[test]
    fn identity_translator_equals_native_bit_exactly() {
        let model = toy_model(&[
            ("sun", [1.0, 0.2]),
            ("moon", [0.9, 0.1]),
            ("rock", [0.1, 1.0]),
            ("tree", [0.4, 0.6]),
        ]);
        let gs = goldset(&[
            ("Sun", "moon", 3.8),
            ("sun", "rock", 1.0),
            ("moon", "TREE", 1.4),
            ("tree", "rock", 2.2),
        ]);
        let native = evaluate(&model, &gs, OovPolicy::Skip, None).unwrap();
        let translator = Translator::new(Backend::Identity, "en", "en");
        let mt = evaluate(&model, &gs, OovPolicy::Skip, Some(&translator)).unwrap();
        assert_eq!(native.rho.unwrap().to_bits(), mt.rho.unwrap().to_bits());
        assert_eq!(native.n_pairs, mt.n_pairs);
        assert_eq!(native.n_oov, mt.n_oov);
    }

    #[test]
    fn translation_failures_count_toward_oov() {
        let model = toy_model(&[("dog", [1.0, 0.0]), ("cat", [0.9, 0.2])]);
        let lexicon: std::collections::HashMap<String, String> =
            [("hund", "dog"), ("katze", "cat")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        let translator = Translator::new(Backend::Lexicon(lexicon), "de", "en");
        let gs = goldset(&[
            ("Hund", "Katze", 3.5),
            ("Hund", "Vogel", 1.0), // vogel missing from the lexicon
            ("Katze", "Hund", 3.0),
        ]);
        let result = evaluate(&model, &gs, OovPolicy::Skip, Some(&translator)).unwrap();
        assert_eq!(result.n_failed_translations, 1);
        assert_eq!(result.n_oov, 1);
        assert_eq!(result.n_pairs, 2);
    }

    #[test]
    fn report_aggregates_are_unweighted_means() {
        let mk = |ds: DatasetId, model: ModelKind, lang: &str, rho: f64| EvalResult {
            dataset: ds,
            lang: lang.into(),
            model,
            strategy: Strategy::Native,
            rho: Some(rho),
            n_pairs: 10,
            n_oov: 0,
            n_failed_translations: 0,
            oov_policy: OovPolicy::Skip,
            low_coverage: false,
        };
        let report = ExperimentReport::from_cells(
            vec!["en".into(), "de".into()],
            vec![
                mk(DatasetId::Mc, ModelKind::W2v, "en", 0.8),
                mk(DatasetId::Mc, ModelKind::W2v, "de", 0.6),
                mk(DatasetId::Mc, ModelKind::Esa, "en", 0.4),
                mk(DatasetId::Mc, ModelKind::Esa, "de", 0.2),
            ],
        );
        let avg_w2v = report
            .model_avg(DatasetId::Mc, ModelKind::W2v, Strategy::Native)
            .unwrap();
        assert!((avg_w2v - 0.7).abs() < 1e-12);
        let lang_en = report.lang_avg("en", Strategy::Native).unwrap();
        assert!((lang_en - 0.6).abs() < 1e-12);
        let ds = report.dataset_avg(DatasetId::Mc, Strategy::Native).unwrap();
        assert!((ds - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_cell_report_aggregates_match_cell() {
        let cell = EvalResult {
            dataset: DatasetId::Rg,
            lang: "fr".into(),
            model: ModelKind::Lsa,
            strategy: Strategy::Native,
            rho: Some(0.42),
            n_pairs: 65,
            n_oov: 0,
            n_failed_translations: 0,
            oov_policy: OovPolicy::Skip,
            low_coverage: false,
        };
        let report = ExperimentReport::from_cells(vec!["fr".into()], vec![cell]);
        assert_eq!(
            report.model_avg(DatasetId::Rg, ModelKind::Lsa, Strategy::Native),
            Some(0.42)
        );
        assert_eq!(report.lang_avg("fr", Strategy::Native), Some(0.42));
        assert_eq!(report.dataset_avg(DatasetId::Rg, Strategy::Native), Some(0.42));
    }

    #[test]
    fn size_correlation_is_permutation_invariant_and_signed() {
        let mk = |lang: &str, rho: f64| EvalResult {
            dataset: DatasetId::Mc,
            lang: lang.into(),
            model: ModelKind::Lsa,
            strategy: Strategy::Native,
            rho: Some(rho),
            n_pairs: 30,
            n_oov: 0,
            n_failed_translations: 0,
            oov_policy: OovPolicy::Skip,
            low_coverage: false,
        };
        let stats: BTreeMap<String, SizePoint> = [
            ("aa", 1.0),
            ("bb", 2.0),
            ("cc", 3.0),
            ("dd", 4.0),
        ]
        .iter()
        .map(|&(l, s)| {
            (
                l.to_string(),
                SizePoint {
                    unique_tokens: s,
                    tokens: 10.0 * s,
                },
            )
        })
        .collect();

        // Scores strictly increasing with corpus size -> r = 1.
        let cells = vec![mk("aa", 0.1), mk("bb", 0.2), mk("cc", 0.3), mk("dd", 0.4)];
        let report = ExperimentReport::from_cells(
            vec!["aa".into(), "bb".into(), "cc".into(), "dd".into()],
            cells.clone(),
        );
        let correlations = corpus_size_correlation(&report, &stats);
        for c in &correlations {
            assert_eq!(c.n_points, 4);
            assert!((c.r.unwrap() - 1.0).abs() < 1e-12);
        }

        // Permuting language order leaves the correlation unchanged.
        let mut shuffled = cells;
        shuffled.reverse();
        let report2 = ExperimentReport::from_cells(
            vec!["dd".into(), "cc".into(), "bb".into(), "aa".into()],
            shuffled,
        );
        let correlations2 = corpus_size_correlation(&report2, &stats);
        for (a, b) in correlations.iter().zip(&correlations2) {
            assert_eq!(a.r, b.r);
        }
    }

    #[test]
    fn size_correlation_needs_three_points() {
        let mk = |lang: &str, rho: f64| EvalResult {
            dataset: DatasetId::Mc,
            lang: lang.into(),
            model: ModelKind::Esa,
            strategy: Strategy::Native,
            rho: Some(rho),
            n_pairs: 30,
            n_oov: 0,
            n_failed_translations: 0,
            oov_policy: OovPolicy::Skip,
            low_coverage: false,
        };
        let stats: BTreeMap<String, SizePoint> = [("aa", 1.0), ("bb", 2.0)]
            .iter()
            .map(|&(l, s)| {
                (
                    l.to_string(),
                    SizePoint {
                        unique_tokens: s,
                        tokens: s,
                    },
                )
            })
            .collect();
        let report = ExperimentReport::from_cells(
            vec!["aa".into(), "bb".into()],
            vec![mk("aa", 0.1), mk("bb", 0.2)],
        );
        for c in corpus_size_correlation(&report, &stats) {
            assert_eq!(c.r, None);
            assert_eq!(c.n_points, 2);
        }
    }
}
