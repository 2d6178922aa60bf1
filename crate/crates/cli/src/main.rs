//! One binary for the whole pipeline: corpus statistics, model training,
//! word-pair translation, evaluation and the query service.
//!
//! Exit codes: 0 success, 2 usage or bad input, 3 runtime failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dsmkit::corpus::{
    build_vocabulary, corpus_stats, load_stopwords, CorpusFormat, PreprocessConfig, Preprocessor,
    TextCorpus,
};
use dsmkit::eval::{
    corpus_size_correlation, diff_report, headline_aggregates, load_paper_tables,
    render_accuracy_table, render_diff_table, render_scores_csv, render_scores_table,
    render_size_correlation_table, run_experiment, ExperimentConfig, ExperimentReport, OovPolicy,
    Strategy, TranslatorSpec,
};
use dsmkit::goldsets::{load_gold, validate_gold, DatasetId};
use dsmkit::training::{
    build_cooc, train_esa, train_glove, train_lsa, train_w2v, DistanceWeighting, EpochProgress,
    EsaParams, GloveParams, LsaParams, LsaWeighting, W2vParams,
};
use dsmkit::translate::{
    batch_translate, translation_accuracy, AccuracyMode, Backend, GoldTranslationSet,
    HttpBackend, HttpBackendConfig, PairMode, Translator,
};
use dsmkit::vecspace::{Model, ModelKind};

mod manifest;
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "dsmkit", version, about = "Multilingual distributional semantics toolkit")]
struct Cli {
    /// Worker threads for training (0 = all available cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Token, type and document counts of a corpus.
    CorpusStats(CorpusStatsArgs),
    /// Train one of the four model families and write the model file.
    Train(TrainArgs),
    /// Translate a dataset's word pairs; reports accuracy when reference
    /// translations are available.
    TranslatePairs(TranslateArgs),
    /// Validate a gold set file.
    ValidateGold(ValidateGoldArgs),
    /// Run an experiment grid and write the JSON report.
    Eval(EvalArgs),
    /// Render tables from a stored report or from the published-values fixture.
    Report(ReportArgs),
    /// Serve registered models over HTTP.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    LinePerDoc,
    BlankLine,
}

impl From<FormatArg> for CorpusFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::LinePerDoc => CorpusFormat::LinePerDoc,
            FormatArg::BlankLine => CorpusFormat::BlankLineDelimited,
        }
    }
}

#[derive(Args)]
struct PreprocessArgs {
    /// Corpus file format.
    #[arg(long, value_enum, default_value = "line-per-doc")]
    format: FormatArg,
    /// Keep the original case instead of lowercasing.
    #[arg(long)]
    no_lowercase: bool,
    /// Stemmer language code; defaults to the corpus language. Use "none"
    /// to disable stemming.
    #[arg(long)]
    stemmer: Option<String>,
    /// Stopword file, one surface form per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl PreprocessArgs {
    fn build(&self, lang: &str) -> anyhow::Result<PreprocessConfig> {
        let stopwords = match &self.stopwords {
            Some(path) => load_stopwords(path)?,
            None => BTreeSet::new(),
        };
        let stemmer = match self.stemmer.as_deref() {
            Some("none") => None,
            Some(other) => Some(other.to_string()),
            None => Some(lang.to_string()),
        };
        Ok(PreprocessConfig {
            lowercase: !self.no_lowercase,
            stemmer,
            stopwords,
        })
    }
}

#[derive(Args)]
struct CorpusStatsArgs {
    /// Corpus file (UTF-8 plain text).
    #[arg(long)]
    corpus: PathBuf,
    /// Language code (used for stemming defaults and output).
    #[arg(long)]
    lang: String,
    #[command(flatten)]
    preprocess: PreprocessArgs,
    /// Write the stats TSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Esa,
    Lsa,
    W2v,
    Glove,
}

impl From<ModelArg> for ModelKind {
    fn from(value: ModelArg) -> Self {
        match value {
            ModelArg::Esa => ModelKind::Esa,
            ModelArg::Lsa => ModelKind::Lsa,
            ModelArg::W2v => ModelKind::W2v,
            ModelArg::Glove => ModelKind::Glove,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Ppmi,
    LogEntropy,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    lang: String,
    #[command(flatten)]
    preprocess: PreprocessArgs,
    /// Output directory for `<model>-<lang>.dsm`.
    #[arg(long, default_value = "models")]
    out: PathBuf,
    /// Also write the text interchange format next to the binary.
    #[arg(long)]
    text: bool,

    /// Vector dimensionality (dense models).
    #[arg(long, default_value_t = 300)]
    dim: usize,
    /// Context window; defaults to 10 (w2v, glove) or 5 (lsa).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    /// Training epochs; defaults to 5 (w2v) or 15 (glove).
    #[arg(long)]
    epochs: Option<usize>,
    /// Initial learning rate; defaults to 0.025 (w2v) or 0.05 (glove).
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    subsample: f64,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long, default_value_t = 100.0)]
    x_max: f64,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    /// Association weighting for LSA.
    #[arg(long, value_enum, default_value = "ppmi")]
    weighting: WeightingArg,
    /// Maximum nonzero concepts per word (ESA).
    #[arg(long, default_value_t = 1500)]
    concept_cap: usize,
    #[arg(long, default_value_t = 0.0)]
    idf_smoothing: f64,
    #[arg(long, default_value_t = 1)]
    min_doc_freq: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Identity,
    Lexicon,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairModeArg {
    Joint,
    WordAtATime,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long)]
    lang: String,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, default_value = "en")]
    target_lang: String,
    #[arg(long, value_enum, default_value = "lexicon")]
    backend: BackendArg,
    /// Lexicon file; defaults to `<data-dir>/lexicons/<lang>.tsv`.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// HTTP backend endpoint.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    #[arg(long, default_value_t = 250)]
    backoff_ms: u64,
    /// Persistent translation cache file.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "joint")]
    pair_mode: PairModeArg,
    #[arg(long, default_value_t = 1)]
    max_in_flight: usize,
    /// Score each word separately instead of requiring the whole pair to match.
    #[arg(long)]
    per_word_accuracy: bool,
    /// Write the TSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateGoldArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long)]
    lang: String,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Experiment config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Comma-separated dataset ids (mc,rg,ws353).
    #[arg(long)]
    datasets: Option<String>,
    /// Comma-separated language codes.
    #[arg(long)]
    langs: Option<String>,
    /// Comma-separated model kinds (esa,lsa,w2v,glove).
    #[arg(long)]
    models: Option<String>,
    /// native, mt, or both.
    #[arg(long)]
    strategy: Option<String>,
    /// skip or zero.
    #[arg(long)]
    oov_policy: Option<String>,
    /// identity, lexicon:<dir>, or http:<endpoint>.
    #[arg(long)]
    translator: Option<String>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value = "experiment-report.json")]
    out: PathBuf,
    /// Also write the per-cell CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Recompute the derived tables from the published-values fixture.
    #[arg(long)]
    from_paper_fixture: bool,
    #[arg(long, default_value = "data/fixtures/paper_tables.json")]
    fixture: PathBuf,
    /// Render tables from a stored experiment report.
    #[arg(long)]
    from_report: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Service config JSON (bind address, model registry, translator).
    #[arg(long)]
    config: PathBuf,
}

/// An error carrying the process exit code.
struct CliError {
    code: i32,
    error: anyhow::Error,
}

type CliResult = Result<(), CliError>;

fn usage_err(error: impl Into<anyhow::Error>) -> CliError {
    CliError {
        code: 2,
        error: error.into(),
    }
}

fn runtime_err(error: impl Into<anyhow::Error>) -> CliError {
    CliError {
        code: 3,
        error: error.into(),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let workers = if cli.workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        cli.workers
    };
    let result = match cli.command {
        Command::CorpusStats(args) => cmd_corpus_stats(args),
        Command::Train(args) => cmd_train(args, workers),
        Command::TranslatePairs(args) => cmd_translate_pairs(args),
        Command::ValidateGold(args) => cmd_validate_gold(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Report(args) => cmd_report(args),
        Command::Serve(args) => cmd_serve(args),
    };
    if let Err(e) = result {
        eprintln!("error: {:#}", e.error);
        std::process::exit(e.code);
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, content).map_err(runtime_err),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_corpus_stats(args: CorpusStatsArgs) -> CliResult {
    let cfg = args.preprocess.build(&args.lang).map_err(usage_err)?;
    let pre = Preprocessor::new(cfg);
    for warning in pre.warnings() {
        log::warn!("{warning}");
    }
    let corpus = TextCorpus::new(&args.corpus, args.preprocess.format.into());
    let stats = corpus_stats(&corpus, &pre).map_err(usage_err)?;
    let line = format!(
        "{}\t{}\t{}\t{}\n",
        args.lang, stats.unique_token_count, stats.token_count, stats.doc_count
    );
    emit(&args.out, &line)
}

fn cmd_train(args: TrainArgs, workers: usize) -> CliResult {
    if args.dim == 0 {
        return Err(usage_err(anyhow::anyhow!("--dim must be at least 1")));
    }
    if args.concept_cap == 0 {
        return Err(usage_err(anyhow::anyhow!("--concept-cap must be at least 1")));
    }
    let kind: ModelKind = args.model.into();
    let cfg = args.preprocess.build(&args.lang).map_err(usage_err)?;
    let pre = Preprocessor::new(cfg.clone());
    for warning in pre.warnings() {
        log::warn!("{warning}");
    }
    if !args.corpus.exists() {
        return Err(usage_err(anyhow::anyhow!(
            "corpus file {} does not exist",
            args.corpus.display()
        )));
    }
    let corpus = TextCorpus::new(&args.corpus, args.preprocess.format.into());
    let window = args.window.unwrap_or(match kind {
        ModelKind::Lsa => 5,
        _ => 10,
    });
    let progress = |p: EpochProgress| {
        eprintln!("{}\t{:.6}\t{:.6}", p.epoch, p.loss, p.lr);
    };

    let mut run = RunManifest::new(
        "train",
        serde_json::json!({
            "model": kind,
            "lang": args.lang,
            "dim": args.dim,
            "window": window,
            "epochs": args.epochs,
            "negatives": args.negatives,
            "lr": args.lr,
            "subsample": args.subsample,
            "min_count": args.min_count,
            "x_max": args.x_max,
            "alpha": args.alpha,
            "concept_cap": args.concept_cap,
            "idf_smoothing": args.idf_smoothing,
            "min_doc_freq": args.min_doc_freq,
            "seed": args.seed,
            "workers": workers,
            "preprocess": cfg,
        }),
    );
    run.add_input(&args.corpus).map_err(usage_err)?;

    let start = Instant::now();
    let model = match kind {
        ModelKind::W2v => {
            let params = W2vParams {
                dim: args.dim,
                window,
                negatives: args.negatives,
                epochs: args.epochs.unwrap_or(5),
                initial_lr: args.lr.unwrap_or(0.025),
                subsample: args.subsample,
                min_count: args.min_count,
                seed: args.seed,
                workers,
            };
            Model::Dense(train_w2v(&corpus, &pre, &params, Some(&progress)).map_err(runtime_err)?)
        }
        ModelKind::Glove => {
            let vocab = build_vocabulary(&corpus, &pre, args.min_count).map_err(runtime_err)?;
            let cooc = build_cooc(&corpus, &pre, &vocab, window, DistanceWeighting::InverseDistance)
                .map_err(runtime_err)?;
            run.add_timing("cooc", start.elapsed().as_secs_f64());
            let params = GloveParams {
                dim: args.dim,
                window,
                x_max: args.x_max,
                alpha: args.alpha,
                epochs: args.epochs.unwrap_or(15),
                initial_lr: args.lr.unwrap_or(0.05),
                min_count: args.min_count,
                seed: args.seed,
                workers,
            };
            Model::Dense(
                train_glove(&cooc, &vocab, &params, cfg.clone(), Some(&progress))
                    .map_err(runtime_err)?,
            )
        }
        ModelKind::Lsa => {
            let vocab = build_vocabulary(&corpus, &pre, args.min_count).map_err(runtime_err)?;
            let cooc = build_cooc(&corpus, &pre, &vocab, window, DistanceWeighting::Uniform)
                .map_err(runtime_err)?;
            run.add_timing("cooc", start.elapsed().as_secs_f64());
            let params = LsaParams {
                dim: args.dim,
                window,
                weighting: match args.weighting {
                    WeightingArg::Ppmi => LsaWeighting::Ppmi,
                    WeightingArg::LogEntropy => LsaWeighting::LogEntropy,
                },
                seed: args.seed,
            };
            Model::Dense(train_lsa(&cooc, &vocab, &params, cfg.clone()).map_err(runtime_err)?)
        }
        ModelKind::Esa => {
            let vocab = build_vocabulary(&corpus, &pre, args.min_count).map_err(runtime_err)?;
            let params = EsaParams {
                concept_cap: args.concept_cap,
                idf_smoothing: args.idf_smoothing,
                min_doc_freq: args.min_doc_freq,
            };
            Model::Sparse(train_esa(&corpus, &pre, &vocab, &params).map_err(runtime_err)?)
        }
    };
    run.add_timing("train", start.elapsed().as_secs_f64());

    std::fs::create_dir_all(&args.out).map_err(runtime_err)?;
    let model_path = dsmkit::eval::model_path(&args.out, kind, &args.lang);
    model.save_binary(&model_path).map_err(runtime_err)?;
    run.add_output(&model_path);
    if args.text {
        let text_path = model_path.with_extension("txt");
        model.save_text(&text_path).map_err(runtime_err)?;
        run.add_output(&text_path);
    }
    run.write_for(&model_path).map_err(runtime_err)?;
    eprintln!(
        "wrote {} (vocab {}, dim {}) in {:.1}s",
        model_path.display(),
        model.vocab().len(),
        model.dim(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn parse_dataset(raw: &str) -> Result<DatasetId, CliError> {
    DatasetId::parse(raw)
        .ok_or_else(|| usage_err(anyhow::anyhow!("unknown dataset '{raw}' (mc, rg, ws353)")))
}

fn cmd_translate_pairs(args: TranslateArgs) -> CliResult {
    let dataset = parse_dataset(&args.dataset)?;
    let gold_path = args
        .data_dir
        .join(dataset.as_str())
        .join(format!("{}.tsv", args.lang));
    let goldset = load_gold(dataset, &args.lang, &gold_path).map_err(usage_err)?;

    let backend = match args.backend {
        BackendArg::Identity => Backend::Identity,
        BackendArg::Lexicon => {
            let path = args
                .lexicon
                .clone()
                .unwrap_or_else(|| args.data_dir.join("lexicons").join(format!("{}.tsv", args.lang)));
            Backend::lexicon_from_file(&path).map_err(usage_err)?
        }
        BackendArg::Http => {
            let endpoint = args
                .endpoint
                .clone()
                .ok_or_else(|| usage_err(anyhow::anyhow!("--endpoint is required with --backend http")))?;
            Backend::Http(HttpBackend::new(HttpBackendConfig {
                endpoint,
                timeout_ms: args.timeout_ms,
                retries: args.retries,
                backoff_ms: args.backoff_ms,
            }))
        }
    };
    let mut translator = Translator::new(backend, &args.lang, &args.target_lang).with_pair_mode(
        match args.pair_mode {
            PairModeArg::Joint => PairMode::Joint,
            PairModeArg::WordAtATime => PairMode::WordAtATime,
        },
    );
    if let Some(cache) = &args.cache {
        if let Some(parent) = cache.parent() {
            std::fs::create_dir_all(parent).map_err(runtime_err)?;
        }
        translator = translator.with_cache_file(cache).map_err(runtime_err)?;
    }

    let outcome = batch_translate(&goldset, &translator, args.max_in_flight);
    let hits = outcome.results.iter().filter(|(_, p)| p.cache_hit).count();
    log::info!(
        "{} pairs translated ({} from cache), {} failures",
        outcome.results.len(),
        hits,
        outcome.failures.len()
    );
    let mut tsv = String::new();
    for (_, pair) in &outcome.results {
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            pair.source_lang,
            pair.source_w1,
            pair.source_w2,
            pair.target_w1,
            pair.target_w2,
            pair.backend
        ));
    }
    for failure in &outcome.failures {
        log::warn!(
            "pair {} ({}, {}) failed: {}",
            failure.index,
            failure.w1,
            failure.w2,
            failure.error
        );
    }

    let gold_translations = args
        .data_dir
        .join("gold_translations")
        .join(dataset.as_str())
        .join(format!("{}.tsv", args.lang));
    let accuracy_line = if gold_translations.exists() {
        let gold = GoldTranslationSet::load(dataset, &args.lang, &gold_translations)
            .map_err(runtime_err)?;
        let translated: Vec<_> = outcome.results.iter().map(|(_, p)| p.clone()).collect();
        let mode = if args.per_word_accuracy {
            AccuracyMode::PerWord
        } else {
            AccuracyMode::StrictPair
        };
        let accuracy = translation_accuracy(&translated, &gold, mode).map_err(runtime_err)?;
        Some(format!(
            "# accuracy\t{}\t{}\t{:.4}\t({} of {} pairs translated)\n",
            dataset,
            args.lang,
            accuracy,
            outcome.results.len(),
            goldset.pairs.len()
        ))
    } else {
        None
    };

    match &args.out {
        Some(path) => {
            std::fs::write(path, &tsv).map_err(runtime_err)?;
            if let Some(line) = accuracy_line {
                print!("{line}");
            }
        }
        None => {
            print!("{tsv}");
            if let Some(line) = accuracy_line {
                print!("{line}");
            }
        }
    }
    Ok(())
}

fn cmd_validate_gold(args: ValidateGoldArgs) -> CliResult {
    let dataset = parse_dataset(&args.dataset)?;
    let path = args
        .data_dir
        .join(dataset.as_str())
        .join(format!("{}.tsv", args.lang));
    let set = load_gold(dataset, &args.lang, &path).map_err(usage_err)?;
    let findings = validate_gold(&set);
    if findings.is_empty() {
        println!("{}/{}: ok ({} pairs)", dataset, args.lang, set.pairs.len());
        Ok(())
    } else {
        for finding in &findings {
            println!("{}", serde_json::to_string(finding).map_err(runtime_err)?);
        }
        Err(runtime_err(anyhow::anyhow!(
            "{} finding(s) in {}/{}",
            findings.len(),
            dataset,
            args.lang
        )))
    }
}

fn parse_list<T, F: Fn(&str) -> Result<T, CliError>>(raw: &str, parse: F) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect()
}

fn parse_translator_spec(raw: &str) -> Result<TranslatorSpec, CliError> {
    if raw == "identity" {
        return Ok(TranslatorSpec::Identity);
    }
    if let Some(dir) = raw.strip_prefix("lexicon:") {
        return Ok(TranslatorSpec::Lexicon { dir: dir.into() });
    }
    if let Some(endpoint) = raw.strip_prefix("http:") {
        return Ok(TranslatorSpec::Http(HttpBackendConfig {
            endpoint: endpoint.to_string(),
            timeout_ms: 10_000,
            retries: 3,
            backoff_ms: 250,
        }));
    }
    Err(usage_err(anyhow::anyhow!(
        "translator must be 'identity', 'lexicon:<dir>' or 'http:<endpoint>', got '{raw}'"
    )))
}

fn cmd_eval(args: EvalArgs) -> CliResult {
    let mut config: ExperimentConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(usage_err)?;
            serde_json::from_str(&text).map_err(usage_err)?
        }
        None => ExperimentConfig {
            data_dir: "data".into(),
            model_dir: "models".into(),
            reference_lang: "en".into(),
            languages: Vec::new(),
            datasets: Vec::new(),
            models: Vec::new(),
            strategies: vec![Strategy::Native],
            oov_policy: OovPolicy::Skip,
            translator: None,
            cache_dir: None,
            corpus_stats: Default::default(),
        },
    };

    // Flags win over the config file.
    if let Some(dir) = args.data_dir {
        config.data_dir = dir;
    }
    if let Some(dir) = args.model_dir {
        config.model_dir = dir;
    }
    if let Some(raw) = &args.datasets {
        config.datasets = parse_list(raw, |s| parse_dataset(s))?;
    }
    if let Some(raw) = &args.langs {
        config.languages = raw
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    if let Some(raw) = &args.models {
        config.models = parse_list(raw, |s| {
            ModelKind::parse(s).ok_or_else(|| usage_err(anyhow::anyhow!("unknown model kind '{s}'")))
        })?;
    }
    if let Some(raw) = &args.strategy {
        config.strategies = match raw.as_str() {
            "native" => vec![Strategy::Native],
            "mt" => vec![Strategy::Mt],
            "both" => vec![Strategy::Native, Strategy::Mt],
            other => {
                return Err(usage_err(anyhow::anyhow!(
                    "strategy must be native, mt or both, got '{other}'"
                )))
            }
        };
    }
    if let Some(raw) = &args.oov_policy {
        config.oov_policy = match raw.as_str() {
            "skip" => OovPolicy::Skip,
            "zero" => OovPolicy::Zero,
            other => {
                return Err(usage_err(anyhow::anyhow!(
                    "oov policy must be skip or zero, got '{other}'"
                )))
            }
        };
    }
    if let Some(raw) = &args.translator {
        config.translator = Some(parse_translator_spec(raw)?);
    }
    if let Some(dir) = args.cache_dir {
        config.cache_dir = Some(dir);
    }

    if config.datasets.is_empty() || config.languages.is_empty() || config.models.is_empty() {
        return Err(usage_err(anyhow::anyhow!(
            "empty experiment grid; set --datasets, --langs and --models (or provide --config)"
        )));
    }

    let start = Instant::now();
    let report = run_experiment(&config).map_err(runtime_err)?;
    for missing in &report.missing {
        log::warn!(
            "cell {}/{}/{}/{} absent: {}",
            missing.dataset,
            missing.model,
            missing.lang,
            missing.strategy.as_str(),
            missing.reason
        );
    }

    let mut run = RunManifest::new("eval", serde_json::to_value(&config).map_err(runtime_err)?);
    run.add_timing("experiment", start.elapsed().as_secs_f64());
    std::fs::write(
        &args.out,
        serde_json::to_string_pretty(&report).map_err(runtime_err)?,
    )
    .map_err(runtime_err)?;
    run.add_output(&args.out);
    if let Some(csv) = &args.csv {
        std::fs::write(csv, render_scores_csv(&report)).map_err(runtime_err)?;
        run.add_output(csv);
    }
    run.write_for(&args.out).map_err(runtime_err)?;

    print_report_tables(&report)?;
    eprintln!("report written to {}", args.out.display());
    Ok(())
}

fn print_report_tables(report: &ExperimentReport) -> CliResult {
    let has_native = report.cells.iter().any(|c| c.strategy == Strategy::Native);
    let has_mt = report.cells.iter().any(|c| c.strategy == Strategy::Mt);
    if has_native {
        println!("{}", render_scores_table(report, Strategy::Native));
    }
    if has_mt {
        println!("{}", render_scores_table(report, Strategy::Mt));
    }
    if has_native && has_mt {
        let diff = diff_report(report, report).map_err(runtime_err)?;
        println!("{}", render_diff_table(&diff));
        let summary = headline_aggregates(&diff);
        println!("{}", serde_json::to_string_pretty(&summary).map_err(runtime_err)?);
    }
    if !report.corpus_stats.is_empty() && has_native {
        let native = report.only_strategy(Strategy::Native);
        let correlations = corpus_size_correlation(&native, &report.corpus_stats);
        println!("{}", render_size_correlation_table(&correlations));
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult {
    if let Some(path) = &args.from_report {
        let text = std::fs::read_to_string(path).map_err(usage_err)?;
        let report: ExperimentReport = serde_json::from_str(&text).map_err(usage_err)?;
        return print_report_tables(&report);
    }
    if !args.from_paper_fixture {
        return Err(usage_err(anyhow::anyhow!(
            "nothing to do; pass --from-paper-fixture or --from-report <file>"
        )));
    }
    let tables = load_paper_tables(&args.fixture).map_err(usage_err)?;
    let native = tables.native_report();
    let mt = tables.mt_report();

    println!("== translation accuracy ==");
    println!("{}", render_accuracy_table(&tables.translation_accuracy));

    println!("== score vs corpus size (computed) ==");
    let correlations = corpus_size_correlation(&native, &tables.corpus_size_millions);
    println!("{}", render_size_correlation_table(&correlations));

    println!("== language-specific scores ==");
    println!("{}", render_scores_table(&native, Strategy::Native));
    println!("== translation-mediated scores ==");
    println!("{}", render_scores_table(&mt, Strategy::Mt));

    let diff = diff_report(&native, &mt).map_err(runtime_err)?;
    println!("== relative difference (translated vs native) ==");
    println!("{}", render_diff_table(&diff));

    let summary = headline_aggregates(&diff);
    println!("== headline aggregates ==");
    println!(
        "overall improvement: {:.1}%  (published: {:.1}%)",
        summary.overall_pct, tables.published.headlines.overall_pct_improvement
    );
    for (dataset, pct) in &summary.per_dataset_pct {
        println!(
            "{dataset}: {pct:.1}%  (published: {:.1}%)",
            tables.published.headlines.per_dataset_pct[dataset]
        );
    }
    if let Some(best) = summary.best_mt_model {
        println!(
            "best translated model: {best} (avg {:.2})",
            summary.mt_model_overall[&best]
        );
    }
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> CliResult {
    let config = dsmkit_service::ServiceConfig::load(&args.config).map_err(runtime_err)?;
    let state = dsmkit_service::AppState::build(&config).map_err(runtime_err)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(runtime_err)?;
    runtime.block_on(async move {
        let listener = dsmkit_service::bind(&config).await.map_err(runtime_err)?;
        dsmkit_service::serve(listener, state).await.map_err(runtime_err)
    })
}
