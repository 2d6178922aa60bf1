//! GloVe: weighted least squares on the logarithm of co-occurrence counts,
//! optimized with AdaGrad over a once-shuffled entry order. The published
//! model is the sum of each word's main and context vectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{PreprocessConfig, Vocabulary};
use crate::vecspace::{DenseModel, ModelKind};

use super::cooc::CoocMatrix;
use super::{invalid_param, EpochProgress, ProgressFn, SharedMatrix, TrainError, TrainResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GloveParams {
    pub dim: usize,
    /// Context window used when counting co-occurrences for this trainer.
    pub window: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for GloveParams {
    fn default() -> Self {
        GloveParams {
            dim: 300,
            window: 10,
            x_max: 100.0,
            alpha: 0.75,
            epochs: 15,
            initial_lr: 0.05,
            min_count: 5,
            seed: 1,
            workers: 1,
        }
    }
}

/// The loss weighting `f(x) = (x / x_max)^alpha` capped at 1.
pub fn glove_weight(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x < x_max {
        (x / x_max).powf(alpha)
    } else {
        1.0
    }
}

/// Loss and gradients of a single cell:
/// `loss = f(x)/2 * (wi·wj + bi + bj - ln x)^2`.
/// Returns `(loss, grad_wi, grad_wj, grad_bi, grad_bj)`.
pub fn glove_cell_loss_and_grads(
    wi: &[f64],
    wj: &[f64],
    bi: f64,
    bj: f64,
    x: f64,
    x_max: f64,
    alpha: f64,
) -> (f64, Vec<f64>, Vec<f64>, f64, f64) {
    let dot: f64 = wi.iter().zip(wj).map(|(a, b)| a * b).sum();
    let diff = dot + bi + bj - x.ln();
    let fdiff = glove_weight(x, x_max, alpha) * diff;
    let loss = 0.5 * fdiff * diff;
    let grad_wi: Vec<f64> = wj.iter().map(|&v| fdiff * v).collect();
    let grad_wj: Vec<f64> = wi.iter().map(|&v| fdiff * v).collect();
    (loss, grad_wi, grad_wj, fdiff, fdiff)
}

struct GloveState {
    w_main: SharedMatrix,
    w_ctx: SharedMatrix,
    b_main: SharedMatrix,
    b_ctx: SharedMatrix,
    acc_main: SharedMatrix,
    acc_ctx: SharedMatrix,
    acc_b_main: SharedMatrix,
    acc_b_ctx: SharedMatrix,
}

fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

fn run_chunk(
    cooc: &CoocMatrix,
    order: &[u32],
    params: &GloveParams,
    state: &GloveState,
) -> f64 {
    let dim = params.dim;
    let eta = params.initial_lr;
    let mut wi = vec![0.0f64; dim];
    let mut wj = vec![0.0f64; dim];
    let mut loss_sum = 0.0;

    for &idx in order {
        let (i, j, x) = cooc.entry(idx as usize);
        if x <= 0.0 {
            continue;
        }
        let (i, j) = (i as usize, j as usize);
        state.w_main.read_row(i, &mut wi);
        state.w_ctx.read_row(j, &mut wj);
        let dot: f64 = wi.iter().zip(&wj).map(|(a, b)| a * b).sum();
        let diff = dot + state.b_main.get(i, 0) + state.b_ctx.get(j, 0) - x.ln();
        let mut fdiff = glove_weight(x, params.x_max, params.alpha) * diff;
        loss_sum += 0.5 * fdiff * diff;

        fdiff *= eta;
        for d in 0..dim {
            let g_main = fdiff * wj[d];
            let g_ctx = fdiff * wi[d];
            let upd_main = finite_or_zero(g_main / state.acc_main.get(i, d).sqrt());
            let upd_ctx = finite_or_zero(g_ctx / state.acc_ctx.get(j, d).sqrt());
            state.w_main.add(i, d, -upd_main);
            state.w_ctx.add(j, d, -upd_ctx);
            state.acc_main.add(i, d, g_main * g_main);
            state.acc_ctx.add(j, d, g_ctx * g_ctx);
        }
        let upd_bi = finite_or_zero(fdiff / state.acc_b_main.get(i, 0).sqrt());
        let upd_bj = finite_or_zero(fdiff / state.acc_b_ctx.get(j, 0).sqrt());
        state.b_main.add(i, 0, -upd_bi);
        state.b_ctx.add(j, 0, -upd_bj);
        let fsq = fdiff * fdiff;
        state.acc_b_main.add(i, 0, fsq);
        state.acc_b_ctx.add(j, 0, fsq);
    }
    loss_sum
}

/// Fit GloVe vectors to a co-occurrence matrix.
///
/// Deterministic for a fixed seed with `workers == 1`. The returned rows are
/// the sum of main and context vectors.
pub fn train_glove(
    cooc: &CoocMatrix,
    vocab: &Vocabulary,
    params: &GloveParams,
    preprocess: PreprocessConfig,
    progress: Option<&ProgressFn<'_>>,
) -> TrainResult<DenseModel> {
    if params.dim == 0 {
        return Err(invalid_param("dim", "must be at least 1"));
    }
    if params.x_max <= 0.0 {
        return Err(invalid_param("x_max", "must be positive"));
    }
    if !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(invalid_param("alpha", "must be in (0, 1]"));
    }
    if params.epochs == 0 {
        return Err(invalid_param("epochs", "must be at least 1"));
    }
    if params.workers == 0 {
        return Err(invalid_param("workers", "must be at least 1"));
    }
    assert_eq!(
        vocab.len(),
        cooc.vocab_len(),
        "vocabulary and matrix disagree on size"
    );
    let active: usize = cooc.iter().filter(|&(_, _, v)| v > 0.0).count();
    if active == 0 {
        return Err(TrainError::EmptyCooc);
    }

    let v = vocab.len();
    let dim = params.dim;
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let scale = 1.0 / (dim as f64 + 1.0);
    let mut init = |n: usize| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-0.5..0.5) * scale).collect()
    };
    let state = GloveState {
        w_main: SharedMatrix::from_vec(init(v * dim), dim),
        w_ctx: SharedMatrix::from_vec(init(v * dim), dim),
        b_main: SharedMatrix::from_vec(init(v), 1),
        b_ctx: SharedMatrix::from_vec(init(v), 1),
        acc_main: SharedMatrix::zeros(v, dim),
        acc_ctx: SharedMatrix::zeros(v, dim),
        acc_b_main: SharedMatrix::zeros(v, 1),
        acc_b_ctx: SharedMatrix::zeros(v, 1),
    };
    state.acc_main.fill(1.0);
    state.acc_ctx.fill(1.0);
    state.acc_b_main.fill(1.0);
    state.acc_b_ctx.fill(1.0);

    // One global shuffle of the training order, as in the usual pipeline.
    let mut order: Vec<u32> = (0..cooc.nnz() as u32).collect();
    order.shuffle(&mut rng);

    for epoch in 0..params.epochs {
        let epoch_loss;
        if params.workers == 1 {
            epoch_loss = run_chunk(cooc, &order, params, &state);
        } else {
            let chunk = order.len().div_ceil(params.workers);
            let losses: Vec<f64> = std::thread::scope(|scope| {
                let handles: Vec<_> = order
                    .chunks(chunk)
                    .map(|slice| {
                        let state_ref = &state;
                        scope.spawn(move || run_chunk(cooc, slice, params, state_ref))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            epoch_loss = losses.iter().sum();
        }
        if let Some(report) = progress {
            report(EpochProgress {
                epoch,
                loss: epoch_loss / active as f64,
                lr: params.initial_lr,
            });
        }
    }

    let mut rows = Vec::with_capacity(v * dim);
    for i in 0..v {
        for d in 0..dim {
            rows.push(state.w_main.get(i, d) + state.w_ctx.get(i, d));
        }
    }
    Ok(DenseModel::new(
        ModelKind::Glove,
        vocab.clone(),
        dim,
        rows,
        preprocess,
    )?)
}
