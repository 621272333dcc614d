//! Dense complex matrices and multipartite operator algebra.
//!
//! Composite indices are big-endian: subsystem 0 varies slowest, so the
//! composite basis state |i₀ i₁ … i_{m−1}⟩ has index
//! Σ_k i_k · Π_{j>k} d_j. All tensor contractions in this crate are written
//! against that convention, and the canonical subsystem order for four-party
//! process tensors is A, B′, B, C′.

mod cmatrix;
mod eig;
mod multilinear;

#[cfg(test)]
pub(crate) mod test_support {
    use super::{C64, CMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn rand_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    pub fn rand_hermitian(n: usize, seed: u64) -> CMatrix {
        rand_matrix(n, n, seed).hermitize()
    }
}

pub use cmatrix::{CMatrix, C64};
pub use eig::EighResult;
pub use multilinear::{
    bell_sandwich, bell_vector, kron, partial_trace, partial_transpose, permute_subsystems,
    swap_operator,
};

use thiserror::Error;

/// Errors from the matrix kernel.
#[derive(Debug, Error)]
pub enum QmatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid subsystem dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid permutation {perm:?} for {n} subsystems")]
    InvalidPermutation { perm: Vec<usize>, n: usize },
    #[error("eigensolver failed with LAPACK info = {0}")]
    EigFailed(i32),
    #[error("matrix entries are not finite after {0}")]
    NonFinite(&'static str),
}

/// Ordered list of subsystem dimensions of a multipartite operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimSpec {
    dims: Vec<usize>,
}

impl DimSpec {
    pub fn new(dims: &[usize]) -> Result<Self, QmatError> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(QmatError::InvalidDimension(format!(
                "subsystem dimensions must be positive, got {dims:?}"
            )));
        }
        Ok(Self { dims: dims.to_vec() })
    }

    /// Total Hilbert-space dimension Π d_k.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    /// Strides of the big-endian composite index (subsystem 0 slowest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Check that these dimensions factor a matrix of side `side`.
    pub fn check_side(&self, side: usize) -> Result<(), QmatError> {
        if self.total() != side {
            return Err(QmatError::DimensionMismatch(format!(
                "subsystem dims {:?} (product {}) do not factor side {}",
                self.dims,
                self.total(),
                side
            )));
        }
        Ok(())
    }
}
