//! Trainers for the four model families.
//!
//! W2V streams the corpus directly; GloVe and LSA factor a co-occurrence
//! matrix built by [`cooc`]; ESA builds TF-IDF postings over documents.
//! Every trainer is bit-deterministic with a fixed seed and a single worker;
//! with more workers the dense trainers update shared parameters without
//! locks (hogwild), trading determinism for throughput.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::vecspace::VecspaceError;

pub mod cooc;
pub mod esa;
pub mod glove;
pub mod lsa;
pub mod w2v;

pub use cooc::{build_cooc, CoocMatrix, DistanceWeighting};
pub use esa::{train_esa, EsaParams};
pub use glove::{glove_cell_loss_and_grads, glove_weight, train_glove, GloveParams};
pub use lsa::{train_lsa, LsaParams, LsaWeighting};
pub use w2v::{sgns_loss, sgns_loss_and_grads, train_w2v, W2vParams};

pub type TrainResult<T> = Result<T, TrainError>;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus produced an empty vocabulary")]
    EmptyVocabulary,
    #[error("co-occurrence matrix has no nonzero entries")]
    EmptyCooc,
    #[error("invalid parameter {name}: {message}")]
    InvalidParam {
        name: &'static str,
        message: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Vecspace(#[from] VecspaceError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid_param(name: &'static str, message: impl Into<String>) -> TrainError {
    TrainError::InvalidParam {
        name,
        message: message.into(),
    }
}

/// Per-epoch progress for trainers with a loss. `loss` is the mean loss per
/// training example over the epoch.
#[derive(Debug, Clone, Copy)]
pub struct EpochProgress {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

pub type ProgressFn<'a> = dyn Fn(EpochProgress) + Sync + 'a;

/// A matrix of f64 cells updatable from several threads without locks.
///
/// Reads and writes are relaxed atomics on the bit pattern; concurrent
/// read-modify-write updates may lose increments, which the hogwild training
/// contract tolerates. Single-threaded use is exact.
pub(crate) struct SharedMatrix {
    cells: Vec<AtomicU64>,
    cols: usize,
}

impl SharedMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        cells.resize_with(rows * cols, || AtomicU64::new(0.0f64.to_bits()));
        SharedMatrix { cells, cols }
    }

    pub fn from_vec(values: Vec<f64>, cols: usize) -> Self {
        SharedMatrix {
            cells: values
                .into_iter()
                .map(|v| AtomicU64::new(v.to_bits()))
                .collect(),
            cols,
        }
    }

    pub fn fill(&self, value: f64) {
        let bits = value.to_bits();
        for cell in &self.cells {
            cell.store(bits, Ordering::Relaxed);
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        f64::from_bits(self.cells[row * self.cols + col].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn add(&self, row: usize, col: usize, delta: f64) {
        let idx = row * self.cols + col;
        let cell = &self.cells[idx];
        let current = f64::from_bits(cell.load(Ordering::Relaxed));
        cell.store((current + delta).to_bits(), Ordering::Relaxed);
    }

    /// Copy a row into the provided buffer.
    #[inline]
    pub fn read_row(&self, row: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cols);
        let base = row * self.cols;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f64::from_bits(self.cells[base + i].load(Ordering::Relaxed));
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| f64::from_bits(c.load(Ordering::Relaxed)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_matrix_get_set_add() {
        let m = SharedMatrix::zeros(2, 3);
        m.add(1, 2, 4.0);
        m.add(1, 2, 0.5);
        assert_eq!(m.get(1, 2), 4.5);
        assert_eq!(m.get(0, 0), 0.0);
        let v = m.to_vec();
        assert_eq!(v.len(), 6);
        assert_eq!(v[5], 4.5);
    }
}
