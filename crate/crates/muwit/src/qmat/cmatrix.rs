//! Dense row-major complex matrix.

use super::QmatError;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

pub type C64 = num_complex::Complex64;

// BLAS complex GEMM from the system OpenBLAS (linked in build.rs).
extern "C" {
    fn zgemm_(
        transa: *const std::ffi::c_char,
        transb: *const std::ffi::c_char,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const C64,
        a: *const C64,
        lda: *const i32,
        b: *const C64,
        ldb: *const i32,
        beta: *const C64,
        c: *mut C64,
        ldc: *const i32,
    );
}

/// Dense complex matrix with row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "…" } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  …")?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from row-major real/imaginary pairs; length must be rows·cols.
    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(f64, f64)]) -> Self {
        assert_eq!(pairs.len(), rows * cols, "entry count mismatch");
        Self {
            rows,
            cols,
            data: pairs.iter().map(|&(re, im)| C64::new(re, im)).collect(),
        }
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vector(v: &[C64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// |r⟩⟨c| basis matrix of side n.
    pub fn basis(n: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(r, c)] = C64::new(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose M†.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-entry Hermiticity residual |M − M†|.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    /// (M + M†)/2.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    /// Smallest eigenvalue of the Hermitized matrix is ≥ −tol.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        match self.hermitize().eigh() {
            Ok(e) => e.values.first().is_some_and(|&l| l >= -tol),
            Err(_) => false,
        }
    }

    /// Smallest eigenvalue of the Hermitized matrix.
    pub fn min_eig(&self) -> Result<f64, QmatError> {
        let e = self.hermitize().eigh()?;
        Ok(*e.values.first().expect("nonempty spectrum"))
    }

    /// Re tr(A† B), the real Hilbert–Schmidt inner product.
    pub fn inner_re(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        if n * k * m >= 8192 {
            return self.matmul_blas(rhs);
        }
        let mut out = Self::zeros(n, m);
        for r in 0..n {
            let lrow = &self.data[r * k..(r + 1) * k];
            let orow = &mut out.data[r * m..(r + 1) * m];
            for (p, &l) in lrow.iter().enumerate() {
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[p * m..(p + 1) * m];
                for (o, &x) in orow.iter_mut().zip(rrow.iter()) {
                    *o += l * x;
                }
            }
        }
        out
    }

    /// zgemm-backed product; row-major C = A·B is computed as the
    /// column-major identity Cᵀ = Bᵀ·Aᵀ.
    fn matmul_blas(&self, rhs: &Self) -> Self {
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = Self::zeros(n, m);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        unsafe {
            zgemm_(
                &(b'N' as std::ffi::c_char),
                &(b'N' as std::ffi::c_char),
                &(m as i32),
                &(n as i32),
                &(k as i32),
                &one,
                rhs.data.as_ptr(),
                &(m as i32),
                self.data.as_ptr(),
                &(k as i32),
                &zero,
                out.data.as_mut_ptr(),
                &(m as i32),
            );
        }
        out
    }

    /// A M A†.
    pub fn conjugate_by(&self, a: &Self) -> Self {
        a.matmul(self).matmul(&a.dagger())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

macro_rules! impl_elementwise {
    ($trait:ident, $fn:ident, $op:tt) => {
        impl $trait for &CMatrix {
            type Output = CMatrix;
            fn $fn(self, rhs: &CMatrix) -> CMatrix {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
                CMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self
                        .data
                        .iter()
                        .zip(rhs.data.iter())
                        .map(|(a, b)| a $op b)
                        .collect(),
                }
            }
        }
    };
}

impl_elementwise!(Add, add, +);
impl_elementwise!(Sub, sub, -);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_against_hand_computation() {
        let a = CMatrix::from_pairs(2, 2, &[(1.0, 0.0), (0.0, 1.0), (2.0, 0.0), (0.0, 0.0)]);
        let b = CMatrix::from_pairs(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, -1.0)]);
        let ab = a.matmul(&b);
        assert_eq!(ab[(0, 0)], c(0.0, 1.0));
        assert_eq!(ab[(0, 1)], c(2.0, 0.0));
        assert_eq!(ab[(1, 0)], c(0.0, 0.0));
        assert_eq!(ab[(1, 1)], c(2.0, 0.0));
    }

    #[test]
    fn dagger_and_hermitize() {
        let m = CMatrix::from_pairs(2, 2, &[(1.0, 1.0), (2.0, 3.0), (0.0, 0.0), (4.0, 0.0)]);
        let h = m.hermitize();
        assert!(h.is_hermitian(1e-15));
        assert!((h[(0, 1)] - c(1.0, 1.5)).norm() < 1e-15);
        assert!((m.dagger()[(1, 0)] - c(2.0, -3.0)).norm() < 1e-15);
    }

    #[test]
    fn psd_checks() {
        assert!(CMatrix::identity(3).is_psd(1e-9));
        assert!(!CMatrix::diag(&[1.0, -1e-3]).is_psd(1e-6));
        // Gram matrix A†A is PSD by construction.
        let a = CMatrix::from_fn(4, 4, |r, c_| c(((r * 3 + c_) % 5) as f64, (r as f64) - (c_ as f64)));
        let g = a.dagger().matmul(&a);
        assert!(g.is_psd(1e-9));
    }

    #[test]
    fn inner_re_matches_trace() {
        let a = CMatrix::from_fn(3, 3, |r, c_| c(r as f64 + 1.0, c_ as f64));
        let b = CMatrix::from_fn(3, 3, |r, c_| c(c_ as f64 - 1.0, r as f64 * 0.5));
        let direct = a.dagger().matmul(&b).trace().re;
        assert!((a.inner_re(&b) - direct).abs() < 1e-12);
    }
}
