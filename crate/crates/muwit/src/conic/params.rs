//! Real coordinates for Hermitian matrices and the real symmetric embedding.
//!
//! A Hermitian n×n matrix has n² real degrees of freedom: the diagonal,
//! then √2-scaled real and imaginary parts of each upper off-diagonal
//! entry. The scaling makes the coordinate map an isometry for the
//! Hilbert–Schmidt inner product.

use crate::qmat::{CMatrix, C64};

/// Number of real parameters of a Hermitian matrix of side n.
pub fn param_len(side: usize) -> usize {
    side * side
}

/// Isometric real coordinates of a Hermitian matrix.
pub fn herm_to_params(m: &CMatrix) -> Vec<f64> {
    let n = m.rows();
    assert!(m.is_square());
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    for r in 0..n {
        for c in (r + 1)..n {
            out.push(s2 * m[(r, c)].re);
            out.push(s2 * m[(r, c)].im);
        }
    }
    out
}

/// Inverse of [`herm_to_params`]; always returns an exactly Hermitian matrix.
pub fn params_to_herm(side: usize, p: &[f64]) -> CMatrix {
    assert_eq!(p.len(), param_len(side), "parameter count");
    let s2inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(side, side);
    for i in 0..side {
        m[(i, i)] = C64::new(p[i], 0.0);
    }
    let mut k = side;
    for r in 0..side {
        for c in (r + 1)..side {
            let z = C64::new(p[k] * s2inv, p[k + 1] * s2inv);
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Real symmetric embedding [[Re H, −Im H], [Im H, Re H]] of a square
/// complex matrix. For Hermitian H the embedding is symmetric, H is PSD
/// iff the embedding is PSD, and the spectrum doubles in multiplicity.
pub fn embed_real(h: &CMatrix) -> CMatrix {
    assert!(h.is_square(), "embed_real needs a square matrix");
    let n = h.rows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            out[(r, c)] = C64::new(z.re, 0.0);
            out[(r, c + n)] = C64::new(-z.im, 0.0);
            out[(r + n, c)] = C64::new(z.im, 0.0);
            out[(r + n, c + n)] = C64::new(z.re, 0.0);
        }
    }
    out
}
