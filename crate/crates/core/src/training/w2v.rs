//! Skip-gram with negative sampling.
//!
//! The trainer streams the corpus once per epoch. For every (center,
//! context) pair inside a dynamically shrunk window it pushes the context
//! vector towards the center's output vector and away from sampled noise
//! words (unigram^0.75 noise distribution), with a linearly decaying
//! learning rate. Frequent words are randomly subsampled.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSource, Preprocessor, Vocabulary};
use crate::vecspace::{DenseModel, ModelKind};

use super::{invalid_param, EpochProgress, ProgressFn, SharedMatrix, TrainError, TrainResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W2vParams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Frequency threshold for subsampling; 0 disables it.
    pub subsample: f64,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for W2vParams {
    fn default() -> Self {
        W2vParams {
            dim: 300,
            window: 10,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample: 1e-5,
            min_count: 5,
            seed: 1,
            workers: 1,
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable ln(sigmoid(x)).
#[inline]
fn log_sigmoid(x: f64) -> f64 {
    // -softplus(-x); softplus(y) = ln(1 + e^y) without overflow.
    let y = -x;
    if y > 30.0 {
        -y
    } else {
        -y.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss of a single SGNS example:
/// `-ln σ(u·p) - Σ ln σ(-u·nᵢ)` for input `u`, positive `p`, negatives `nᵢ`.
pub fn sgns_loss(input: &[f64], positive: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let mut loss = -log_sigmoid(dot(input, positive));
    for n in negatives {
        loss -= log_sigmoid(-dot(input, n));
    }
    loss
}

/// Loss plus analytic gradients of [`sgns_loss`] with respect to every
/// vector. Returns `(loss, grad_input, grad_positive, grad_negatives)`.
pub fn sgns_loss_and_grads(
    input: &[f64],
    positive: &[f64],
    negatives: &[Vec<f64>],
) -> (f64, Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let dim = input.len();
    let mut grad_input = vec![0.0; dim];
    let mut loss = 0.0;

    let s_pos = sigmoid(dot(input, positive));
    loss -= log_sigmoid(dot(input, positive));
    let g_pos = s_pos - 1.0;
    let grad_positive: Vec<f64> = input.iter().map(|&u| g_pos * u).collect();
    for (gi, &p) in grad_input.iter_mut().zip(positive) {
        *gi += g_pos * p;
    }

    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s_neg = sigmoid(dot(input, n));
        loss -= log_sigmoid(-dot(input, n));
        let grad_n: Vec<f64> = input.iter().map(|&u| s_neg * u).collect();
        for (gi, &x) in grad_input.iter_mut().zip(n) {
            *gi += s_neg * x;
        }
        grad_negatives.push(grad_n);
    }
    (loss, grad_input, grad_positive, grad_negatives)
}

/// Noise distribution proportional to unigram frequency^0.75, sampled by
/// binary search over the cumulative mass.
struct UnigramTable {
    cumulative: Vec<f64>,
}

impl UnigramTable {
    fn new(vocab: &Vocabulary) -> Self {
        let mut cumulative = Vec::with_capacity(vocab.len());
        let mut acc = 0.0;
        for id in 0..vocab.len() as u32 {
            acc += (vocab.count(id) as f64).powf(0.75);
            cumulative.push(acc);
        }
        UnigramTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> u32 {
        let total = *self.cumulative.last().expect("nonempty vocabulary");
        let r = rng.gen_range(0.0..total);
        self.cumulative.partition_point(|&c| c <= r) as u32
    }
}

struct TrainState<'a> {
    vocab: &'a Vocabulary,
    syn0: SharedMatrix,
    syn1: SharedMatrix,
    table: UnigramTable,
    total_tokens: u64,
    processed: AtomicU64,
    total_work: u64,
}

const LR_BATCH: u64 = 10_000;
const LR_FLOOR_FACTOR: f64 = 1e-4;

fn worker_seed(seed: u64, worker: usize, epoch: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(((worker as u64) << 32) | epoch as u64)
}

fn run_epoch(
    source: &dyn CorpusSource,
    pre: &Preprocessor,
    params: &W2vParams,
    state: &TrainState<'_>,
    worker: usize,
    epoch: usize,
) -> TrainResult<(f64, u64)> {
    let dim = params.dim;
    let mut rng = ChaCha20Rng::seed_from_u64(worker_seed(params.seed, worker, epoch));
    let mut input_buf = vec![0.0f64; dim];
    let mut output_buf = vec![0.0f64; dim];
    let mut grad_input = vec![0.0f64; dim];
    let mut loss_sum = 0.0f64;
    let mut examples = 0u64;
    let mut local_words = 0u64;
    let mut lr = current_lr(params, state);
    let subsample_threshold = params.subsample * state.total_tokens as f64;

    for doc in source.documents()? {
        let doc = doc?;
        if doc.id % params.workers != worker {
            continue;
        }
        let mut sentence: Vec<u32> = Vec::new();
        for token in pre.tokens(&doc.text) {
            let Some(id) = state.vocab.id(&token) else {
                continue;
            };
            local_words += 1;
            if local_words >= LR_BATCH {
                state.processed.fetch_add(local_words, Ordering::Relaxed);
                local_words = 0;
                lr = current_lr(params, state);
            }
            if params.subsample > 0.0 {
                let count = state.vocab.count(id) as f64;
                let keep = (subsample_threshold / count).sqrt() + subsample_threshold / count;
                if rng.gen::<f64>() >= keep {
                    continue;
                }
            }
            sentence.push(id);
        }

        for center_pos in 0..sentence.len() {
            let center = sentence[center_pos];
            let shrink = rng.gen_range(0..params.window);
            let span = params.window - shrink;
            let lo = center_pos.saturating_sub(span);
            let hi = (center_pos + span).min(sentence.len() - 1);
            for context_pos in lo..=hi {
                if context_pos == center_pos {
                    continue;
                }
                let context = sentence[context_pos];
                // Input is the context word's embedding; outputs are the
                // center word (label 1) and sampled noise words (label 0).
                state.syn0.read_row(context as usize, &mut input_buf);
                grad_input.fill(0.0);
                let mut loss = 0.0;

                state.syn1.read_row(center as usize, &mut output_buf);
                let x = dot(&input_buf, &output_buf);
                loss -= log_sigmoid(x);
                let g_pos = sigmoid(x) - 1.0;
                for d in 0..dim {
                    grad_input[d] += g_pos * output_buf[d];
                    state.syn1.add(center as usize, d, -lr * g_pos * input_buf[d]);
                }

                for _ in 0..params.negatives {
                    let noise = state.table.sample(&mut rng);
                    if noise == center {
                        continue;
                    }
                    state.syn1.read_row(noise as usize, &mut output_buf);
                    let x = dot(&input_buf, &output_buf);
                    loss -= log_sigmoid(-x);
                    let g_neg = sigmoid(x);
                    for d in 0..dim {
                        grad_input[d] += g_neg * output_buf[d];
                        state.syn1.add(noise as usize, d, -lr * g_neg * input_buf[d]);
                    }
                }

                for d in 0..dim {
                    state.syn0.add(context as usize, d, -lr * grad_input[d]);
                }
                loss_sum += loss;
                examples += 1;
            }
        }
    }
    state.processed.fetch_add(local_words, Ordering::Relaxed);
    Ok((loss_sum, examples))
}

fn current_lr(params: &W2vParams, state: &TrainState<'_>) -> f64 {
    let done = state.processed.load(Ordering::Relaxed) as f64;
    let remaining = (1.0 - done / (state.total_work as f64 + 1.0)).max(LR_FLOOR_FACTOR);
    params.initial_lr * remaining
}

/// Train a skip-gram negative-sampling model over a corpus.
///
/// Bit-deterministic for a fixed seed with `workers == 1`; more workers
/// update the shared matrices hogwild-style.
pub fn train_w2v(
    source: &dyn CorpusSource,
    pre: &Preprocessor,
    params: &W2vParams,
    progress: Option<&ProgressFn<'_>>,
) -> TrainResult<DenseModel> {
    if params.dim == 0 {
        return Err(invalid_param("dim", "must be at least 1"));
    }
    if params.window == 0 {
        return Err(invalid_param("window", "must be at least 1"));
    }
    if params.negatives == 0 {
        return Err(invalid_param("negatives", "must be at least 1"));
    }
    if params.epochs == 0 {
        return Err(invalid_param("epochs", "must be at least 1"));
    }
    if params.workers == 0 {
        return Err(invalid_param("workers", "must be at least 1"));
    }

    let mut doc_count = 0u64;
    let mut counts: std::collections::HashMap<String, u64> = std::collections::HashMap::new();
    for doc in source.documents()? {
        doc_count += 1;
        for token in pre.tokens(&doc?.text) {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    if doc_count == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let vocab = Vocabulary::from_counts(counts, params.min_count);
    if vocab.is_empty() {
        return Err(TrainError::EmptyVocabulary);
    }

    let dim = params.dim;
    let mut init_rng = ChaCha20Rng::seed_from_u64(params.seed);
    let half = 0.5 / dim as f64;
    let init: Vec<f64> = (0..vocab.len() * dim)
        .map(|_| init_rng.gen_range(-half..half))
        .collect();
    let total_tokens = vocab.total_count();
    let state = TrainState {
        vocab: &vocab,
        syn0: SharedMatrix::from_vec(init, dim),
        syn1: SharedMatrix::zeros(vocab.len(), dim),
        table: UnigramTable::new(&vocab),
        total_tokens,
        processed: AtomicU64::new(0),
        total_work: total_tokens * params.epochs as u64,
    };

    for epoch in 0..params.epochs {
        let mut epoch_loss = 0.0;
        let mut epoch_examples = 0u64;
        if params.workers == 1 {
            let (loss, examples) = run_epoch(source, pre, params, &state, 0, epoch)?;
            epoch_loss = loss;
            epoch_examples = examples;
        } else {
            let results: Vec<TrainResult<(f64, u64)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..params.workers)
                    .map(|worker| {
                        let state_ref = &state;
                        scope.spawn(move || run_epoch(source, pre, params, state_ref, worker, epoch))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            for result in results {
                let (loss, examples) = result?;
                epoch_loss += loss;
                epoch_examples += examples;
            }
        }
        if let Some(report) = progress {
            report(EpochProgress {
                epoch,
                loss: if epoch_examples > 0 {
                    epoch_loss / epoch_examples as f64
                } else {
                    0.0
                },
                lr: current_lr(params, &state),
            });
        }
    }

    let vectors = state.syn0.to_vec();
    drop(state);
    Ok(DenseModel::new(
        ModelKind::W2v,
        vocab,
        dim,
        vectors,
        pre.config().clone(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MemCorpus, PreprocessConfig};
    use crate::vecspace::cosine;
    use approx::assert_relative_eq;

    fn quick_params(dim: usize, epochs: usize, seed: u64) -> W2vParams {
        W2vParams {
            dim,
            window: 2,
            negatives: 3,
            epochs,
            initial_lr: 0.05,
            subsample: 0.0,
            min_count: 1,
            seed,
            workers: 1,
        }
    }

    #[test]
    fn clustered_corpus_orders_similarities() {
        // {a,b} always co-occur, {x,y} always co-occur, never across groups.
        let mut docs = Vec::new();
        for _ in 0..60 {
            docs.push("a b a b a b".to_string());
            docs.push("x y x y x y".to_string());
        }
        let corpus = MemCorpus { docs };
        let pre = Preprocessor::new(PreprocessConfig::default());
        let model = train_w2v(&corpus, &pre, &quick_params(16, 12, 3), None).unwrap();
        let v = model.vocab();
        let (a, b, x) = (
            v.id("a").unwrap(),
            v.id("b").unwrap(),
            v.id("x").unwrap(),
        );
        let cos_ab = cosine(model.vector(a), model.vector(b)).unwrap().value();
        let cos_ax = cosine(model.vector(a), model.vector(x)).unwrap().value();
        assert!(
            cos_ab > cos_ax,
            "expected cos(a,b) > cos(a,x): {cos_ab} vs {cos_ax}"
        );
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = MemCorpus::default();
        let pre = Preprocessor::new(PreprocessConfig::default());
        assert!(matches!(
            train_w2v(&corpus, &pre, &quick_params(8, 1, 1), None),
            Err(TrainError::EmptyCorpus)
        ));
    }

    #[test]
    fn zero_dim_is_rejected() {
        let corpus = MemCorpus::new(["a b"]);
        let pre = Preprocessor::new(PreprocessConfig::default());
        assert!(matches!(
            train_w2v(&corpus, &pre, &quick_params(0, 1, 1), None),
            Err(TrainError::InvalidParam { name: "dim", .. })
        ));
    }

    #[test]
    fn loss_matches_closed_form_on_hand_set_vectors() {
        // One (center, context, negative) triple with hand-set vectors:
        //   u·p = 0.3*1 + (-0.5)*2 = -0.7
        //   u·n = 0.3*(-1) + (-0.5)*0.5 = -0.55
        // loss = -ln σ(-0.7) - ln σ(0.55)
        let u = vec![0.3, -0.5];
        let p = vec![1.0, 2.0];
        let n = vec![vec![-1.0, 0.5]];
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let expected = -sig(-0.7f64).ln() - sig(0.55f64).ln();
        assert_relative_eq!(sgns_loss(&u, &p, &n), expected, epsilon = 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for _ in 0..20 {
            let dim = rng.gen_range(2..6);
            let n_neg = rng.gen_range(1..4);
            let sample = |rng: &mut ChaCha20Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect()
            };
            let u = sample(&mut rng);
            let p = sample(&mut rng);
            let negs: Vec<Vec<f64>> = (0..n_neg).map(|_| sample(&mut rng)).collect();
            let (_, gu, gp, gn) = sgns_loss_and_grads(&u, &p, &negs);

            let h = 1e-5;
            let check = |analytic: f64, numeric: f64| {
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    ((analytic - numeric) / denom).abs() < 1e-4,
                    "analytic {analytic} vs numeric {numeric}"
                );
            };
            for d in 0..dim {
                let mut up = u.clone();
                let mut um = u.clone();
                up[d] += h;
                um[d] -= h;
                check(gu[d], (sgns_loss(&up, &p, &negs) - sgns_loss(&um, &p, &negs)) / (2.0 * h));

                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[d] += h;
                pm[d] -= h;
                check(gp[d], (sgns_loss(&u, &pp, &negs) - sgns_loss(&u, &pm, &negs)) / (2.0 * h));

                for (i, gni) in gn.iter().enumerate() {
                    let mut np = negs.clone();
                    let mut nm = negs.clone();
                    np[i][d] += h;
                    nm[i][d] -= h;
                    check(gni[d], (sgns_loss(&u, &p, &np) - sgns_loss(&u, &p, &nm)) / (2.0 * h));
                }
            }
        }
    }

    #[test]
    fn training_is_deterministic_single_worker() {
        let corpus = MemCorpus::new(["the quick brown fox", "jumps over the lazy dog", "the fox"]);
        let pre = Preprocessor::new(PreprocessConfig::default());
        let m1 = train_w2v(&corpus, &pre, &quick_params(8, 3, 7), None).unwrap();
        let m2 = train_w2v(&corpus, &pre, &quick_params(8, 3, 7), None).unwrap();
        for id in 0..m1.vocab().len() as u32 {
            assert_eq!(m1.vector(id), m2.vector(id));
        }
    }

    #[test]
    fn different_seeds_differ() {
        let corpus = MemCorpus::new(["a b c d e f g h", "c d e a b f"]);
        let pre = Preprocessor::new(PreprocessConfig::default());
        let m1 = train_w2v(&corpus, &pre, &quick_params(8, 2, 1), None).unwrap();
        let m2 = train_w2v(&corpus, &pre, &quick_params(8, 2, 2), None).unwrap();
        let any_diff = (0..m1.vocab().len() as u32)
            .any(|id| m1.vector(id) != m2.vector(id));
        assert!(any_diff);
    }

    #[test]
    fn progress_reports_once_per_epoch() {
        let corpus = MemCorpus::new(["a b c a b c", "b c a"]);
        let pre = Preprocessor::new(PreprocessConfig::default());
        let epochs = std::sync::Mutex::new(Vec::new());
        let callback = |p: EpochProgress| {
            epochs.lock().unwrap().push((p.epoch, p.loss));
        };
        train_w2v(&corpus, &pre, &quick_params(4, 3, 5), Some(&callback)).unwrap();
        let seen = epochs.into_inner().unwrap();
        assert_eq!(seen.len(), 3);
        assert!(seen.iter().all(|&(_, loss)| loss.is_finite() && loss >= 0.0));
    }
}
