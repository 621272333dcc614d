//! Hermitian eigendecomposition via LAPACK's divide-and-conquer driver.

use super::cmatrix::{C64, CMatrix};
use super::QmatError;

/// Full spectrum of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EighResult {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose column k is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl EighResult {
    /// Σ_k f(λ_k) v_k v_k†.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        self.apply_spectral_complex(|l| C64::new(f(l), 0.0))
    }

    /// Σ_k f(λ_k) v_k v_k† for complex-valued f (e.g. phases e^{−iλt}).
    pub fn apply_spectral_complex(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        // W = V·diag(f), assemble W·V†
        let mut w = self.vectors.clone();
        for k in 0..n {
            let s = f(self.values[k]);
            for i in 0..n {
                w[(i, k)] *= s;
            }
        }
        w.matmul(&self.vectors.dagger())
    }

    /// Projection onto the PSD cone: clamp negative eigenvalues to zero.
    pub fn positive_part(&self) -> CMatrix {
        self.apply_spectral(|l| l.max(0.0))
    }
}

impl CMatrix {
    /// Eigendecomposition of a Hermitian matrix (the strictly lower/upper
    /// mismatch is not checked here; callers pass Hermitian or hermitized
    /// input). Uses `zheevd`.
    pub fn eigh(&self) -> Result<EighResult, QmatError> {
        assert!(self.is_square(), "eigh of non-square matrix");
        let n = self.rows();
        if n == 0 {
            return Ok(EighResult { values: vec![], vectors: CMatrix::zeros(0, 0) });
        }
        // Row-major Hermitian A viewed column-major is conj(A); its
        // eigenvectors are the conjugates of A's, which is undone below.
        let mut buf = self.data().to_vec();
        let mut values = vec![0f64; n];
        let info = zheevd_inplace(&mut buf, n, &mut values)?;
        if info != 0 {
            return Err(QmatError::EigFailed(info));
        }
        let mut vectors = CMatrix::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                vectors[(i, k)] = buf[i + k * n].conj();
            }
        }
        if !values.iter().all(|v| v.is_finite()) || !vectors.is_finite() {
            return Err(QmatError::NonFinite("eigh"));
        }
        Ok(EighResult { values, vectors })
    }
}

fn zheevd_inplace(a: &mut [C64], n: usize, w: &mut [f64]) -> Result<i32, QmatError> {
    let nn = n as i32;
    let mut info: i32 = 0;
    let jobz = b'V' as std::ffi::c_char;
    let uplo = b'L' as std::ffi::c_char;
    unsafe {
        let mut work_q = [C64::new(0.0, 0.0)];
        let mut rwork_q = [0f64];
        let mut iwork_q = [0i32];
        let neg1 = -1i32;
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &nn,
            a.as_mut_ptr() as *mut _,
            &nn,
            w.as_mut_ptr(),
            work_q.as_mut_ptr() as *mut _,
            &neg1,
            rwork_q.as_mut_ptr(),
            &neg1,
            iwork_q.as_mut_ptr(),
            &neg1,
            &mut info,
        );
        if info != 0 {
            return Ok(info);
        }
        let lwork = work_q[0].re as i32;
        let lrwork = rwork_q[0] as i32;
        let liwork = iwork_q[0];
        let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
        let mut rwork = vec![0f64; lrwork.max(1) as usize];
        let mut iwork = vec![0i32; liwork.max(1) as usize];
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &nn,
            a.as_mut_ptr() as *mut _,
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::qmat::test_support::rand_hermitian;

    #[test]
    fn eigh_reconstructs_matrix() {
        let a = rand_hermitian(13, 7);
        let e = a.eigh().unwrap();
        let back = e.apply_spectral(|l| l);
        assert!((&back - &a).max_abs() < 1e-12);
        // ascending order
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1] + 1e-14);
        }
        // columns orthonormal
        let gram = e.vectors.dagger().matmul(&e.vectors);
        assert!((&gram - &CMatrix::identity(13)).max_abs() < 1e-12);
    }

    #[test]
    fn eigh_pauli_y() {
        // complex off-diagonal entries exercise the row/column-major
        // conjugation bookkeeping
        let y = CMatrix::from_pairs(2, 2, &[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)]);
        let e = y.eigh().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let back = e.apply_spectral(|l| l);
        assert!((&back - &y).max_abs() < 1e-14);
    }

    #[test]
    fn positive_part_is_projection() {
        let a = rand_hermitian(9, 3);
        let p = a.eigh().unwrap().positive_part();
        assert!(p.is_psd(1e-12));
        // idempotent up to roundoff
        let p2 = p.eigh().unwrap().positive_part();
        assert!((&p2 - &p).max_abs() < 1e-11);
        // p - a is PSD as well (it subtracts the negative part)
        assert!((&p - &a).is_psd(1e-11));
    }
}
