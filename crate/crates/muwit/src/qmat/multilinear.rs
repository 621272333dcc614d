//! Tensor products, partial operations, and Bell-state contractions.

use super::cmatrix::{C64, CMatrix};
use super::{DimSpec, QmatError};

/// Kronecker product, left factor varying slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = (b.rows(), b.cols());
    let mut out = CMatrix::zeros(a.rows() * p, a.cols() * q);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn check_square_with_dims(m: &CMatrix, dims: &DimSpec) -> Result<(), QmatError> {
    if !m.is_square() {
        return Err(QmatError::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    dims.check_side(m.rows())
}

fn check_subsystems(dims: &DimSpec, subsystems: &[usize]) -> Result<(), QmatError> {
    for &s in subsystems {
        if s >= dims.len() {
            return Err(QmatError::DimensionMismatch(format!(
                "subsystem index {s} out of range for {} subsystems",
                dims.len()
            )));
        }
    }
    Ok(())
}

/// Offsets of every multi-index over the listed subsystems, all other
/// components zero. `offsets.len()` is the product of the listed dims.
fn index_offsets(dims: &DimSpec, subsystems: &[usize]) -> Vec<usize> {
    let strides = dims.strides();
    let mut offsets = vec![0usize];
    for &s in subsystems {
        let d = dims.dim(s);
        let stride = strides[s];
        let mut next = Vec::with_capacity(offsets.len() * d);
        for &base in &offsets {
            for k in 0..d {
                next.push(base + k * stride);
            }
        }
        offsets = next;
    }
    offsets
}

/// Trace over the listed subsystems; the remaining ordering is preserved.
pub fn partial_trace(
    m: &CMatrix,
    dims: &DimSpec,
    traced: &[usize],
) -> Result<CMatrix, QmatError> {
    check_square_with_dims(m, dims)?;
    check_subsystems(dims, traced)?;
    let mut traced_sorted = traced.to_vec();
    traced_sorted.sort_unstable();
    traced_sorted.dedup();
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced_sorted.contains(k)).collect();
    let keep_offsets = index_offsets(dims, &kept);
    let trace_offsets = index_offsets(dims, &traced_sorted);
    let out_n = keep_offsets.len();
    let n = m.rows();
    let mut out = CMatrix::zeros(out_n, out_n);
    for (r, &ro) in keep_offsets.iter().enumerate() {
        for (c, &co) in keep_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &to in &trace_offsets {
                acc += m.data()[(ro + to) * n + (co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transpose the listed subsystems only. Involutive.
pub fn partial_transpose(
    m: &CMatrix,
    dims: &DimSpec,
    transposed: &[usize],
) -> Result<CMatrix, QmatError> {
    check_square_with_dims(m, dims)?;
    check_subsystems(dims, transposed)?;
    let mut set = transposed.to_vec();
    set.sort_unstable();
    set.dedup();
    let strides = dims.strides();
    let n = m.rows();
    // Split every composite index into its component inside the transposed
    // set and the remainder.
    let mut in_set = vec![0usize; n];
    for idx in 0..n {
        let mut part = 0usize;
        for &s in &set {
            let comp = (idx / strides[s]) % dims.dim(s);
            part += comp * strides[s];
        }
        in_set[idx] = part;
    }
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let (tr, rr) = (in_set[r], r - in_set[r]);
        for c in 0..n {
            let (tc, rc) = (in_set[c], c - in_set[c]);
            out[(r, c)] = m.data()[(tc + rr) * n + (tr + rc)];
        }
    }
    Ok(out)
}

/// Relabel subsystems: output slot `k` carries input subsystem `perm[k]`.
/// A similarity transform by a permutation matrix.
pub fn permute_subsystems(
    m: &CMatrix,
    dims: &DimSpec,
    perm: &[usize],
) -> Result<CMatrix, QmatError> {
    check_square_with_dims(m, dims)?;
    let nsub = dims.len();
    let mut seen = vec![false; nsub];
    if perm.len() != nsub || perm.iter().any(|&p| p >= nsub || std::mem::replace(&mut seen[p], true)) {
        return Err(QmatError::InvalidPermutation { perm: perm.to_vec(), n: nsub });
    }
    let strides = dims.strides();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims.dim(p)).collect();
    let new_spec = DimSpec::new(&new_dims)?;
    let new_strides = new_spec.strides();
    let n = m.rows();
    let mut map = vec![0usize; n];
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut o = 0usize;
        for k in 0..nsub {
            let comp = (idx / strides[perm[k]]) % dims.dim(perm[k]);
            o += comp * new_strides[k];
        }
        *slot = o;
    }
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = m.data()[r * n + c];
        }
    }
    Ok(out)
}

/// Unnormalized Bell column vector Σ_{k<d} |k⟩⊗|k⟩; squared norm d.
pub fn bell_vector(d: usize) -> Result<CMatrix, QmatError> {
    if d < 1 {
        return Err(QmatError::InvalidDimension("bell_vector needs d ≥ 1".into()));
    }
    let mut v = CMatrix::zeros(d * d, 1);
    for k in 0..d {
        v[(k * d + k, 0)] = C64::new(1.0, 0.0);
    }
    Ok(v)
}

/// Swap operator 𝔽 |k,l⟩ = |l,k⟩ on d⊗d; 𝔽² = 1, tr 𝔽 = d.
pub fn swap_operator(d: usize) -> Result<CMatrix, QmatError> {
    if d < 1 {
        return Err(QmatError::InvalidDimension("swap_operator needs d ≥ 1".into()));
    }
    let mut f = CMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            f[(k * d + l, l * d + k)] = C64::new(1.0, 0.0);
        }
    }
    Ok(f)
}

/// Contract subsystems `pair = (i, j)` against the unnormalized Bell vector:
/// out = Σ_{k,l} ⟨k_i k_j| X |l_i l_j⟩, living on the remaining subsystems
/// in their original order.
pub fn bell_sandwich(
    x: &CMatrix,
    dims: &DimSpec,
    pair: (usize, usize),
) -> Result<CMatrix, QmatError> {
    check_square_with_dims(x, dims)?;
    let (i, j) = pair;
    check_subsystems(dims, &[i, j])?;
    if i == j || dims.dim(i) != dims.dim(j) {
        return Err(QmatError::DimensionMismatch(format!(
            "bell_sandwich pair ({i},{j}) must be distinct subsystems of equal dimension"
        )));
    }
    let d = dims.dim(i);
    let strides = dims.strides();
    let rest: Vec<usize> = (0..dims.len()).filter(|&k| k != i && k != j).collect();
    let rest_offsets = index_offsets(dims, &rest);
    let pair_stride = strides[i] + strides[j];
    let n = x.rows();
    let out_n = rest_offsets.len();
    let mut out = CMatrix::zeros(out_n, out_n);
    for (r, &ro) in rest_offsets.iter().enumerate() {
        for (c, &co) in rest_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                let row = ro + k * pair_stride;
                for l in 0..d {
                    acc += x.data()[row * n + (co + l * pair_stride)];
                }
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_cmatrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
            .prop_map(move |pairs| CMatrix::from_pairs(rows, cols, &pairs))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trace_out_second_factor_of_product(
            a in arb_cmatrix(3, 3),
            b in arb_cmatrix(2, 2),
        ) {
            let dims = DimSpec::new(&[3, 2]).unwrap();
            let t = partial_trace(&kron(&a, &b), &dims, &[1]).unwrap();
            let expect = a.scale(b.trace());
            prop_assert!((&t - &expect).max_abs() < 1e-12);
        }

        #[test]
        fn partial_transpose_involution_hermiticity_trace(m in arb_cmatrix(12, 12)) {
            let h = m.hermitize();
            let dims = DimSpec::new(&[2, 3, 2]).unwrap();
            let pt = partial_transpose(&h, &dims, &[0, 2]).unwrap();
            prop_assert!(pt.is_hermitian(1e-13));
            prop_assert!((pt.trace() - h.trace()).norm() < 1e-12);
            let back = partial_transpose(&pt, &dims, &[0, 2]).unwrap();
            prop_assert!((&back - &h).max_abs() < 1e-14);
        }

        #[test]
        fn permutation_preserves_spectrum(m in arb_cmatrix(12, 12)) {
            let h = m.hermitize();
            let dims = DimSpec::new(&[2, 3, 2]).unwrap();
            let p = permute_subsystems(&h, &dims, &[2, 0, 1]).unwrap();
            let ea = h.eigh().unwrap().values;
            let eb = p.eigh().unwrap().values;
            for (x, y) in ea.iter().zip(eb.iter()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn bell_sandwich_agrees_with_index_sum(m in arb_cmatrix(16, 16)) {
            let d = 2;
            let dims = DimSpec::new(&[d, d, d, d]).unwrap();
            let g = bell_sandwich(&m, &dims, (1, 2)).unwrap();
            for a in 0..d {
                for cc in 0..d {
                    for a2 in 0..d {
                        for c2 in 0..d {
                            let mut acc = C64::new(0.0, 0.0);
                            for k in 0..d {
                                for l in 0..d {
                                    let r = ((a * d + k) * d + k) * d + cc;
                                    let s = ((a2 * d + l) * d + l) * d + c2;
                                    acc += m[(r, s)];
                                }
                            }
                            prop_assert!((g[(a * d + cc, a2 * d + c2)] - acc).norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}
