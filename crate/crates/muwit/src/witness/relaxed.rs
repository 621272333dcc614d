//! Relaxed non-MU witnesses: minimize tr[W E_u] + ⟨Φ⁺|P|Φ⁺⟩ over Hermitian
//! (W, P) subject to W⊗1/d + P^{AC′}⊗Φ⁺-projector^{B′B} = Q + R^{⊤_{BC′}}
//! with Q, R ⪰ 0. The cheaper variant sets Q = 0.
//!
//! As stated the program is positively homogeneous (its value is 0 or −∞),
//! so the witness sign is meaningful but the magnitude is not. Spectral
//! box constraints −1 ⪯ W ⪯ 1 and −1 ⪯ P ⪯ 1 normalize the value without
//! moving the sign boundary. Soundness does not rest on the boxes: the
//! reported value is the objective of an exactly feasible (W, P, Q, R)
//! tuple of the unboxed program, so it can never be negative for a
//! mixed-unitary channel.

use super::{
    validate_unital_choi, SolveStats, WitnessCertificate, WitnessError, WitnessKind,
    WitnessResult, WitnessSettings, WitnessStatus,
};
use crate::channels::ChoiMatrix;
use crate::conic::{
    solve_with_start, AffineExpr, LinOp, LinTerm, SdpProblem, Sense, WarmStart,
};
use crate::qmat::{bell_vector, kron, partial_transpose, CMatrix, DimSpec, C64};

/// Embedding map for the P term: P ↦ P^{AC′} ⊗ Φ⁺-projector^{B′B} arranged
/// on A,B′,B,C′, as a conjugation P ↦ B P B† with B[(a,k,k,c′),(a,c′)] = 1.
fn p_embedding(d: usize) -> CMatrix {
    let n = d * d * d * d;
    let mut b = CMatrix::zeros(n, d * d);
    for a in 0..d {
        for k in 0..d {
            for c in 0..d {
                b[(((a * d + k) * d + k) * d + c, a * d + c)] = C64::new(1.0, 0.0);
            }
        }
    }
    b
}

/// Build the relaxed-witness SDP. `with_q` keeps both slack blocks; the
/// cheaper variant drops Q.
pub fn build_relaxed_problem(
    choi: &ChoiMatrix,
    with_q: bool,
) -> Result<SdpProblem, WitnessError> {
    validate_unital_choi(choi)?;
    let d = choi.dim();
    let n = d * d * d * d;
    let dims4 = DimSpec::new(&[d, d, d, d])?;
    let mut p = SdpProblem::new(Sense::Minimize);
    let w = p.add_var("W", d * d);
    let pv = p.add_var("P", d * d);
    let r = p.add_var("R", n);
    let q = with_q.then(|| p.add_var("Q", n));

    p.objective_term(w, choi.matrix().clone())?;
    let phi = bell_vector(d)?;
    let phi_proj = phi.matmul(&phi.dagger());
    p.objective_term(pv, phi_proj.clone())?;

    // W⊗1/d + B P B† − Q − Θ(R) = 0
    let mut terms = vec![
        LinTerm { var: w, ops: vec![LinOp::TensorIdRight(d * d), LinOp::Scale(1.0 / d as f64)] },
        LinTerm { var: pv, ops: vec![LinOp::Conjugate(p_embedding(d))] },
        LinTerm {
            var: r,
            ops: vec![
                LinOp::PartialTranspose { dims: dims4, set: vec![2, 3] },
                LinOp::Scale(-1.0),
            ],
        },
    ];
    if let Some(q) = q {
        terms.push(LinTerm { var: q, ops: vec![LinOp::Scale(-1.0)] });
    }
    p.add_eq(AffineExpr {
        label: "split".into(),
        side: n,
        constant: CMatrix::zeros(n, n),
        terms,
    })?;

    p.add_psd(AffineExpr {
        label: "R_psd".into(),
        side: n,
        constant: CMatrix::zeros(n, n),
        terms: vec![LinTerm { var: r, ops: vec![] }],
    })?;
    if let Some(q) = q {
        p.add_psd(AffineExpr {
            label: "Q_psd".into(),
            side: n,
            constant: CMatrix::zeros(n, n),
            terms: vec![LinTerm { var: q, ops: vec![] }],
        })?;
    }
    // spectral boxes on W and P
    for (var, name) in [(w, "W"), (pv, "P")] {
        p.add_psd(AffineExpr {
            label: format!("{name}_box_hi"),
            side: d * d,
            constant: CMatrix::identity(d * d),
            terms: vec![LinTerm { var, ops: vec![LinOp::Scale(-1.0)] }],
        })?;
        p.add_psd(AffineExpr {
            label: format!("{name}_box_lo"),
            side: d * d,
            constant: CMatrix::identity(d * d),
            terms: vec![LinTerm { var, ops: vec![] }],
        })?;
    }
    Ok(p)
}

/// Shared implementation; returns the certified-feasible value and warm
/// state for sweeps.
pub(crate) fn relaxed_with_start(
    choi: &ChoiMatrix,
    with_q: bool,
    settings: &WitnessSettings,
    warm: Option<&WarmStart>,
) -> Result<(WitnessResult, WarmStart), WitnessError> {
    let d = choi.dim();
    let problem = build_relaxed_problem(choi, with_q)?;
    let sol = solve_with_start(&problem, &settings.sdp, warm)?;

    // exact primal correction: given Hermitian (W, P), rebuild feasible
    // slacks and absorb any negativity into a multiple of the identity on W
    let dims4 = DimSpec::new(&[d, d, d, d])?;
    let w0 = sol.variables[0].hermitize();
    let p0 = sol.variables[1].hermitize();
    let y = &kron(&w0, &CMatrix::identity(d * d)).scale_re(1.0 / d as f64)
        + &p0.conjugate_by(&p_embedding(d));
    let shift = if with_q {
        let r_psd = sol.variables[2].hermitize().eigh()?.positive_part();
        let q_implied = &y - &partial_transpose(&r_psd, &dims4, &[2, 3])?;
        let lmin = q_implied.min_eig()?;
        (-lmin + 1e-12).max(0.0)
    } else {
        let r_implied = partial_transpose(&y, &dims4, &[2, 3])?;
        let lmin = r_implied.min_eig()?;
        (-lmin + 1e-12).max(0.0)
    };
    let w_corr = &w0 + &CMatrix::identity(d * d).scale_re(shift * d as f64);
    let phi = bell_vector(d)?;
    let phi_proj = phi.matmul(&phi.dagger());
    let value = choi.matrix().inner_re(&w_corr) + phi_proj.inner_re(&p0);

    let status = WitnessStatus::Solver(sol.status);
    let detected = status.is_conclusive() && value < -settings.eps_detect;
    let certificate = settings
        .want_certificate
        .then(|| WitnessCertificate::DualPair { w: w_corr, p: p0 });
    let stats = SolveStats {
        iterations: sol.iterations,
        gap: sol.gap,
        eq_residual: sol.audit.eq_max_residual,
        psd_min_eig: sol.audit.psd_min_eig,
        primal_value: None,
    };
    let kind = if with_q { WitnessKind::WRelaxed } else { WitnessKind::WR };
    Ok((
        WitnessResult { kind, value, status, detected, certificate, stats },
        sol.warm_start,
    ))
}

/// The relaxed witness with both slack blocks.
pub fn w_relaxed(
    choi: &ChoiMatrix,
    settings: &WitnessSettings,
) -> Result<WitnessResult, WitnessError> {
    relaxed_with_start(choi, true, settings, None).map(|(r, _)| r)
}

/// The cheaper variant with Q = 0.
pub fn w_r(choi: &ChoiMatrix, settings: &WitnessSettings) -> Result<WitnessResult, WitnessError> {
    relaxed_with_start(choi, false, settings, None).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{identity_channel, to_choi};

    #[test]
    fn problem_shapes() {
        let choi = to_choi(&identity_channel(3).unwrap());
        let with_q = build_relaxed_problem(&choi, true).unwrap();
        assert_eq!(with_q.var_sides(), vec![9, 9, 81, 81]);
        assert_eq!(with_q.psd_constraints().len(), 6);
        let without = build_relaxed_problem(&choi, false).unwrap();
        assert_eq!(without.var_sides(), vec![9, 9, 81]);
        assert_eq!(without.psd_constraints().len(), 5);
    }

    #[test]
    fn p_embedding_matches_tensor_construction() {
        let d = 2;
        let p = crate::qmat::test_support::rand_hermitian(d * d, 31);
        let embedded = p.conjugate_by(&p_embedding(d));
        // reference: P ⊗ Φ-projector on (A,C′,B′,B), permuted to A,B′,B,C′
        let phi = bell_vector(d).unwrap();
        let proj = phi.matmul(&phi.dagger());
        let raw = kron(&p, &proj);
        let dims = DimSpec::new(&[d, d, d, d]).unwrap(); // A, C', B', B
        let reference =
            crate::qmat::permute_subsystems(&raw, &dims, &[0, 2, 3, 1]).unwrap();
        assert!((&embedded - &reference).max_abs() < 1e-14);
    }
}
