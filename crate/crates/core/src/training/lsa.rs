//! Latent semantic analysis: weight a windowed co-occurrence matrix (PPMI or
//! log-entropy), factor it with a randomized truncated SVD, and keep the left
//! singular vectors scaled by their singular values.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{PreprocessConfig, Vocabulary};
use crate::vecspace::{DenseModel, ModelKind};

use super::cooc::CoocMatrix;
use super::{invalid_param, TrainError, TrainResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LsaWeighting {
    #[default]
    Ppmi,
    LogEntropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsaParams {
    pub dim: usize,
    pub window: usize,
    pub weighting: LsaWeighting,
    pub seed: u64,
}

impl Default for LsaParams {
    fn default() -> Self {
        LsaParams {
            dim: 300,
            window: 5,
            weighting: LsaWeighting::Ppmi,
            seed: 1,
        }
    }
}

/// Anything that can multiply dense matrices from the left as `A * B` and
/// `Aᵀ * B`. Buffers are row-major.
pub trait MatVec {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A * b` where `b` is `ncols × b_cols`, `out` is `nrows × b_cols`.
    fn mul_dense(&self, b: &[f64], b_cols: usize, out: &mut [f64]);
    /// `out = Aᵀ * b` where `b` is `nrows × b_cols`, `out` is `ncols × b_cols`.
    fn t_mul_dense(&self, b: &[f64], b_cols: usize, out: &mut [f64]);
}

impl MatVec for CoocMatrix {
    fn nrows(&self) -> usize {
        self.vocab_len()
    }

    fn ncols(&self) -> usize {
        self.vocab_len()
    }

    fn mul_dense(&self, b: &[f64], b_cols: usize, out: &mut [f64]) {
        out.fill(0.0);
        for row in 0..self.vocab_len() as u32 {
            let (cols, vals) = self.row(row);
            let out_row = &mut out[row as usize * b_cols..(row as usize + 1) * b_cols];
            for (&col, &v) in cols.iter().zip(vals) {
                let b_row = &b[col as usize * b_cols..(col as usize + 1) * b_cols];
                for (o, x) in out_row.iter_mut().zip(b_row) {
                    *o += v * x;
                }
            }
        }
    }

    fn t_mul_dense(&self, b: &[f64], b_cols: usize, out: &mut [f64]) {
        out.fill(0.0);
        for row in 0..self.vocab_len() as u32 {
            let (cols, vals) = self.row(row);
            let b_row = &b[row as usize * b_cols..(row as usize + 1) * b_cols];
            for (&col, &v) in cols.iter().zip(vals) {
                let out_row = &mut out[col as usize * b_cols..(col as usize + 1) * b_cols];
                for (o, x) in out_row.iter_mut().zip(b_row) {
                    *o += v * x;
                }
            }
        }
    }
}

/// Result of a truncated randomized SVD: `A ≈ U Σ Vᵀ`.
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub const RSVD_OVERSAMPLING: usize = 10;
pub const RSVD_POWER_ITERS: usize = 2;

fn dmatrix_from_row_major(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn row_major_from_dmatrix(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
    out
}

fn orthonormal_range(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Truncated SVD by randomized range finding (Gaussian sketch, QR
/// re-orthonormalization, power iterations), then an exact SVD of the small
/// projected matrix. Deterministic for a fixed seed.
pub fn randomized_svd(
    a: &dyn MatVec,
    rank: usize,
    oversampling: usize,
    power_iters: usize,
    seed: u64,
) -> TruncatedSvd {
    let m = a.nrows();
    let n = a.ncols();
    let max_rank = m.min(n);
    let samples = (rank + oversampling).min(max_rank).max(1);

    // Gaussian sketch via Box-Muller so only a seeded uniform RNG is needed.
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut gaussian = || -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let omega: Vec<f64> = (0..n * samples).map(|_| gaussian()).collect();

    let mut y = vec![0.0; m * samples];
    a.mul_dense(&omega, samples, &mut y);
    let mut q = orthonormal_range(dmatrix_from_row_major(m, samples, &y));

    let mut z_buf = vec![0.0; n * samples];
    for _ in 0..power_iters {
        let q_rows = row_major_from_dmatrix(&q);
        a.t_mul_dense(&q_rows, samples, &mut z_buf);
        let z = orthonormal_range(dmatrix_from_row_major(n, samples, &z_buf));
        let z_rows = row_major_from_dmatrix(&z);
        a.mul_dense(&z_rows, samples, &mut y);
        q = orthonormal_range(dmatrix_from_row_major(m, samples, &y));
    }

    // B = Qᵀ A, computed as (Aᵀ Q)ᵀ.
    let q_rows = row_major_from_dmatrix(&q);
    a.t_mul_dense(&q_rows, samples, &mut z_buf);
    let b = dmatrix_from_row_major(n, samples, &z_buf).transpose();

    let svd = b.svd(true, true);
    let u_small = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let k = rank.min(svd.singular_values.len());

    let u_full = &q * &u_small;
    TruncatedSvd {
        u: u_full.columns(0, k).into(),
        singular_values: svd.singular_values.rows(0, k).into(),
        v_t: v_t.rows(0, k).into(),
    }
}

/// Apply the chosen association weighting to raw co-occurrence counts.
pub fn apply_weighting(cooc: &CoocMatrix, weighting: LsaWeighting) -> CoocMatrix {
    let v = cooc.vocab_len();
    let row_sums: Vec<f64> = (0..v as u32).map(|r| cooc.row_sum(r)).collect();
    let total: f64 = row_sums.iter().sum();
    let mut vals = Vec::with_capacity(cooc.nnz());
    match weighting {
        LsaWeighting::Ppmi => {
            // PPMI: max(0, ln(x_ij * total / (rowsum_i * rowsum_j))).
            // Column sums equal row sums because the matrix is symmetric.
            for (r, c, x) in cooc.iter() {
                let denom = row_sums[r as usize] * row_sums[c as usize];
                let pmi = if x > 0.0 && denom > 0.0 && total > 0.0 {
                    (x * total / denom).ln()
                } else {
                    0.0
                };
                vals.push(pmi.max(0.0));
            }
        }
        LsaWeighting::LogEntropy => {
            // weight_ij = g_i * ln(1 + x_ij) with the usual global entropy
            // term g_i = 1 + Σ_j p_ij ln(p_ij) / ln(n).
            let ln_n = (v.max(2) as f64).ln();
            let mut global = vec![1.0f64; v];
            for (r, _, x) in cooc.iter() {
                let rs = row_sums[r as usize];
                if rs > 0.0 && x > 0.0 {
                    let p = x / rs;
                    global[r as usize] += p * p.ln() / ln_n;
                }
            }
            for (r, _, x) in cooc.iter() {
                vals.push(global[r as usize] * (1.0 + x).ln());
            }
        }
    }
    cooc.with_values(vals)
}

/// Train an LSA model from a co-occurrence matrix.
///
/// The requested dimension is reduced to the numerical rank of the weighted
/// matrix when it exceeds it (with a warning); rows of the model are the
/// left singular vectors scaled by their singular values.
pub fn train_lsa(
    cooc: &CoocMatrix,
    vocab: &Vocabulary,
    params: &LsaParams,
    preprocess: PreprocessConfig,
) -> TrainResult<DenseModel> {
    if params.dim == 0 {
        return Err(invalid_param("dim", "must be at least 1"));
    }
    if cooc.nnz() == 0 {
        return Err(TrainError::EmptyCooc);
    }
    assert_eq!(
        vocab.len(),
        cooc.vocab_len(),
        "vocabulary and matrix disagree on size"
    );

    let weighted = apply_weighting(cooc, params.weighting);
    let svd = randomized_svd(
        &weighted,
        params.dim,
        RSVD_OVERSAMPLING,
        RSVD_POWER_ITERS,
        params.seed,
    );

    // Numerical rank: drop singular values below a relative tolerance.
    let sv_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = sv_max * 1e-10;
    let rank = svd
        .singular_values
        .iter()
        .take_while(|&&s| s > tol)
        .count()
        .max(1);
    let k = params.dim.min(rank);
    if k < params.dim {
        log::warn!(
            "requested dimension {} exceeds the matrix rank; truncating to {k}",
            params.dim
        );
    }

    let mut rows = Vec::with_capacity(vocab.len() * k);
    for r in 0..vocab.len() {
        for c in 0..k {
            rows.push(svd.u[(r, c)] * svd.singular_values[c]);
        }
    }
    Ok(DenseModel::new(
        ModelKind::Lsa,
        vocab.clone(),
        k,
        rows,
        preprocess,
    )?)
}
