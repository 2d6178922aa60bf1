//! Train a model on a plain-text corpus and score it against a gold set.
//!
//! Usage:
//!   train_and_evaluate <corpus> <stopwords> <gold-dir> <kind> [dim] [epochs] [workers]
//!
//! The gold directory must hold mc/en.tsv, rg/en.tsv and ws353/en.tsv.

use std::path::Path;
use std::time::Instant;

use dsmkit::corpus::{load_stopwords, CorpusFormat, PreprocessConfig, Preprocessor, TextCorpus};
use dsmkit::eval::{evaluate, OovPolicy};
use dsmkit::goldsets::{load_gold, DatasetId};
use dsmkit::training::{
    build_cooc, train_esa, train_glove, train_lsa, train_w2v, DistanceWeighting, EsaParams,
    GloveParams, LsaParams, W2vParams,
};
use dsmkit::vecspace::Model;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() < 5 {
        eprintln!("usage: train_and_evaluate <corpus> <stopwords> <gold-dir> <esa|lsa|w2v|glove> [dim] [epochs] [workers]");
        std::process::exit(2);
    }
    let corpus_path = Path::new(&args[1]);
    let stopwords_path = Path::new(&args[2]);
    let gold_dir = Path::new(&args[3]);
    let kind = args[4].as_str();
    let dim: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(100);
    let epochs: usize = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(5);
    let workers: usize = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(2);

    let stopwords = load_stopwords(stopwords_path).expect("stopword file");
    let cfg = PreprocessConfig {
        lowercase: true,
        stemmer: Some("en".into()),
        stopwords,
    };
    let pre = Preprocessor::new(cfg.clone());
    let corpus = TextCorpus::new(corpus_path, CorpusFormat::LinePerDoc);

    let started = Instant::now();
    let progress = |p: dsmkit::training::EpochProgress| {
        eprintln!("epoch {}\tloss {:.5}\tlr {:.5}", p.epoch, p.loss, p.lr);
    };

    let model = match kind {
        "w2v" => {
            let params = W2vParams {
                dim,
                epochs,
                workers,
                ..Default::default()
            };
            Model::Dense(train_w2v(&corpus, &pre, &params, Some(&progress)).unwrap())
        }
        "glove" => {
            let params = GloveParams {
                dim,
                epochs,
                workers,
                ..Default::default()
            };
            let vocab =
                dsmkit::corpus::build_vocabulary(&corpus, &pre, params.min_count).unwrap();
            eprintln!("vocab: {} words", vocab.len());
            let cooc = build_cooc(
                &corpus,
                &pre,
                &vocab,
                params.window,
                DistanceWeighting::InverseDistance,
            )
            .unwrap();
            eprintln!("cooc: {} nonzeros ({:.1}s)", cooc.nnz(), started.elapsed().as_secs_f32());
            Model::Dense(train_glove(&cooc, &vocab, &params, cfg.clone(), Some(&progress)).unwrap())
        }
        "lsa" => {
            let params = LsaParams {
                dim,
                ..Default::default()
            };
            let vocab = dsmkit::corpus::build_vocabulary(&corpus, &pre, 5).unwrap();
            eprintln!("vocab: {} words", vocab.len());
            let cooc = build_cooc(
                &corpus,
                &pre,
                &vocab,
                params.window,
                DistanceWeighting::Uniform,
            )
            .unwrap();
            eprintln!("cooc: {} nonzeros ({:.1}s)", cooc.nnz(), started.elapsed().as_secs_f32());
            Model::Dense(train_lsa(&cooc, &vocab, &params, cfg.clone()).unwrap())
        }
        "esa" => {
            let vocab = dsmkit::corpus::build_vocabulary(&corpus, &pre, 5).unwrap();
            eprintln!("vocab: {} words", vocab.len());
            Model::Sparse(train_esa(&corpus, &pre, &vocab, &EsaParams::default()).unwrap())
        }
        other => {
            eprintln!("unknown model kind {other}");
            std::process::exit(2);
        }
    };
    eprintln!("trained in {:.1}s", started.elapsed().as_secs_f32());

    for dataset in [DatasetId::Mc, DatasetId::Rg, DatasetId::Ws353] {
        let path = gold_dir.join(dataset.as_str()).join("en.tsv");
        let gold = load_gold(dataset, "en", &path).unwrap();
        let result = evaluate(&model, &gold, OovPolicy::Skip, None).unwrap();
        println!(
            "{}\trho={}\tpairs={}\toov={}\tcoverage={:.3}",
            dataset,
            result.rho.map(|r| format!("{r:.4}")).unwrap_or("n/a".into()),
            result.n_pairs,
            result.n_oov,
            result.n_pairs as f64 / gold.pairs.len() as f64
        );
    }
}
