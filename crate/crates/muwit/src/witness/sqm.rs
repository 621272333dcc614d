//! The quantum-memory witness: Bell-fidelity maximization over PPT process
//! tensors compatible with the channel.
//!
//! The full program lives on the four-party space A⊗B′⊗B⊗C′ (side d⁴):
//! maximize (1/d²)⟨Φ⁺|G|Φ⁺⟩ − 1 over X ⪰ 0 with PPT across AB′|BC′ and
//! the marginal constraint Tr_C′ X = E_u ⊗ 1_B, where G is the Bell
//! contraction of X over (B′, B).
//!
//! Every feasible X is supported on supp(E_u)⊗B⊗C′ (a PSD matrix vanishes
//! on the kernel of its partial trace), so the solver works on the
//! compressed space V⊗B⊗C′ with V = supp(E_u). The compression is exact up
//! to the spectral cutoff used to determine the support, and the returned
//! certificates are expanded back to the full space.
//!
//! The reported value is a corrected dual bound: the solver's dual
//! variables are lifted to an exactly dual-feasible triple, whose objective
//! upper-bounds the true maximum. Detections are therefore certificate
//! backed, and mixed-unitary inputs (true value 0) can never be pushed
//! below −ε by solver error.

use super::{
    validate_unital_choi, SolveStats, WitnessCertificate, WitnessError, WitnessKind,
    WitnessResult, WitnessSettings, WitnessStatus,
};
use crate::channels::ChoiMatrix;
use crate::conic::{
    solve_with_start, AffineExpr, LinOp, LinTerm, SdpProblem, SdpStatus, Sense, WarmStart,
};
use crate::qmat::{kron, partial_trace, partial_transpose, CMatrix, DimSpec, C64};

/// Relative spectral cutoff deciding the support of E_u.
const SUPPORT_CUTOFF_REL: f64 = 1e-10;

/// |φ⟩ = Σ_{a,k} |a, k, k, a⟩ on A⊗B′⊗B⊗C′: the Bell pair over (B′,B)
/// tensored with the Bell pair over (A,C′).
fn objective_vector(d: usize) -> CMatrix {
    let n = d * d * d * d;
    let mut phi = CMatrix::zeros(n, 1);
    for a in 0..d {
        for k in 0..d {
            phi[(((a * d + k) * d + k) * d + a, 0)] = C64::new(1.0, 0.0);
        }
    }
    phi
}

/// Build the full-space witness SDP. Only the first hierarchy level (the
/// PPT relaxation) is supported; higher levels return an error.
pub fn build_sqm_problem(choi: &ChoiMatrix, level: u8) -> Result<SdpProblem, WitnessError> {
    if level != 1 {
        return Err(WitnessError::UnsupportedLevel(level));
    }
    validate_unital_choi(choi)?;
    let d = choi.dim();
    let n = d * d * d * d;
    let dims4 = DimSpec::new(&[d, d, d, d])?;
    let mut p = SdpProblem::new(Sense::Maximize);
    let x = p.add_var("X", n);

    let phi = objective_vector(d);
    let proj = phi.matmul(&phi.dagger()).scale_re(1.0 / (d * d) as f64);
    p.objective_term(x, proj)?;
    p.objective_constant(-1.0);

    p.add_psd(AffineExpr {
        label: "X_psd".into(),
        side: n,
        constant: CMatrix::zeros(n, n),
        terms: vec![LinTerm { var: x, ops: vec![] }],
    })?;
    p.add_psd(AffineExpr {
        label: "X_ppt".into(),
        side: n,
        constant: CMatrix::zeros(n, n),
        terms: vec![LinTerm {
            var: x,
            ops: vec![LinOp::PartialTranspose { dims: dims4.clone(), set: vec![2, 3] }],
        }],
    })?;
    let target = kron(choi.matrix(), &CMatrix::identity(d));
    p.add_eq(AffineExpr {
        label: "marginal".into(),
        side: d * d * d,
        constant: target.scale_re(-1.0),
        terms: vec![LinTerm {
            var: x,
            ops: vec![LinOp::PartialTrace { dims: dims4, traced: vec![3] }],
        }],
    })?;
    Ok(p)
}

/// Reusable compressed-solver for one channel or a family sharing a
/// support. Holds the isometry onto V = supp(E_u).
pub struct SqmEngine {
    d: usize,
    /// d²×r isometry; columns span the admissible support.
    basis: CMatrix,
    r: usize,
}

fn support_basis(e: &CMatrix, d: usize) -> Result<(CMatrix, usize), WitnessError> {
    let eig = e.hermitize().eigh()?;
    let lmax = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = (SUPPORT_CUTOFF_REL * lmax).max(1e-14);
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cutoff).collect();
    if keep.is_empty() {
        return Err(WitnessError::InvalidInput("Choi matrix has empty support".into()));
    }
    let mut basis = CMatrix::zeros(d * d, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        for i in 0..d * d {
            basis[(i, col)] = eig.vectors[(i, k)];
        }
    }
    Ok((basis, keep.len()))
}

impl SqmEngine {
    /// Support basis from a single Choi matrix.
    pub fn for_choi(choi: &ChoiMatrix) -> Result<Self, WitnessError> {
        let (basis, r) = support_basis(choi.matrix(), choi.dim())?;
        Ok(Self { d: choi.dim(), basis, r })
    }

    /// Support basis covering a whole convex family: the support of the
    /// uniform average contains the support of every member.
    pub fn for_family(chois: &[&ChoiMatrix]) -> Result<Self, WitnessError> {
        let d = chois
            .first()
            .ok_or_else(|| WitnessError::InvalidInput("empty family".into()))?
            .dim();
        if chois.iter().any(|c| c.dim() != d) {
            return Err(WitnessError::InvalidInput("family members differ in dimension".into()));
        }
        let mut avg = CMatrix::zeros(d * d, d * d);
        for c in chois {
            avg += c.matrix();
        }
        let (basis, r) = support_basis(&avg.scale_re(1.0 / chois.len() as f64), d)?;
        Ok(Self { d, basis, r })
    }

    pub fn compressed_side(&self) -> usize {
        self.r * self.d * self.d
    }

    /// Largest entry of E − Π Π† E Π Π†: how much of the Choi matrix lives
    /// outside the engine's support space.
    fn support_leakage(&self, e: &CMatrix) -> f64 {
        let compressed = e.conjugate_by(&self.basis.dagger());
        let back = compressed.conjugate_by(&self.basis);
        (e - &back).max_abs()
    }

    fn build_compressed(
        &self,
        e_tilde: &CMatrix,
    ) -> Result<(SdpProblem, CMatrix), WitnessError> {
        let (d, r) = (self.d, self.r);
        let m = r * d * d;
        let dims3 = DimSpec::new(&[r, d, d])?;
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_var("X", m);

        // compressed objective vector: φ̃[(v,b,c′)] = conj(Π[(c′,b), v])
        let mut phi = CMatrix::zeros(m, 1);
        for v in 0..r {
            for b in 0..d {
                for c in 0..d {
                    phi[((v * d + b) * d + c, 0)] = self.basis[(c * d + b, v)].conj();
                }
            }
        }
        let proj = phi.matmul(&phi.dagger()).scale_re(1.0 / (d * d) as f64);
        p.objective_term(x, proj.clone())?;
        p.objective_constant(-1.0);

        p.add_psd(AffineExpr {
            label: "X_psd".into(),
            side: m,
            constant: CMatrix::zeros(m, m),
            terms: vec![LinTerm { var: x, ops: vec![] }],
        })?;
        p.add_psd(AffineExpr {
            label: "X_ppt".into(),
            side: m,
            constant: CMatrix::zeros(m, m),
            terms: vec![LinTerm {
                var: x,
                ops: vec![LinOp::PartialTranspose { dims: dims3.clone(), set: vec![1, 2] }],
            }],
        })?;
        let target = kron(e_tilde, &CMatrix::identity(d));
        p.add_eq(AffineExpr {
            label: "marginal".into(),
            side: r * d,
            constant: target.scale_re(-1.0),
            terms: vec![LinTerm {
                var: x,
                ops: vec![LinOp::PartialTrace { dims: dims3, traced: vec![2] }],
            }],
        })?;
        Ok((p, proj))
    }

    /// Evaluate the witness on one Choi matrix, optionally warm-starting
    /// from a previous evaluation with the same engine.
    ///
    /// The SDP runs in warm-chained chunks. After each chunk the solver
    /// duals are lifted to an exactly feasible dual triple (whose objective
    /// upper-bounds the witness) and the primal iterate is corrected onto
    /// the exact marginal slice, blending toward the strictly feasible
    /// point Ẽ⊗1/d when eigenvalue repair is needed. The loop ends once
    /// this certified sandwich is tight.
    pub fn evaluate(
        &self,
        choi: &ChoiMatrix,
        settings: &WitnessSettings,
        warm: Option<&WarmStart>,
    ) -> Result<(WitnessResult, WarmStart), WitnessError> {
        validate_unital_choi(choi)?;
        if choi.dim() != self.d {
            return Err(WitnessError::InvalidInput("dimension mismatch with engine".into()));
        }
        // fall back to a fresh basis when the channel leaks out of the
        // engine's support space (warm starts are dropped by shape checks)
        let leakage = self.support_leakage(choi.matrix());
        if leakage > 1e-8 {
            let fresh = SqmEngine::for_choi(choi)?;
            return fresh.evaluate(choi, settings, None);
        }

        let (d, r) = (self.d, self.r);
        let dims3 = DimSpec::new(&[r, d, d])?;
        let e_tilde = choi.matrix().conjugate_by(&self.basis.dagger()).hermitize();
        // family endpoints can be rank-deficient inside a family-wide
        // support basis, losing strict feasibility; re-compress per point
        {
            let spec = e_tilde.eigh()?.values;
            let lmax = spec.last().copied().unwrap_or(0.0);
            if r > 1 && spec.first().copied().unwrap_or(0.0) < 1e-8 * lmax {
                let fresh = SqmEngine::for_choi(choi)?;
                if fresh.r < r {
                    return fresh.evaluate(choi, settings, None);
                }
            }
        }
        let (problem, c_obj) = self.build_compressed(&e_tilde)?;
        let e_target = kron(&e_tilde, &CMatrix::identity(d));
        let x_strict = kron(&e_tilde, &CMatrix::identity(d * d)).scale_re(1.0 / d as f64);
        let lambda_strict = (e_tilde.eigh()?.values.first().copied().unwrap_or(0.0)
            / d as f64)
            .max(0.0);

        // feasibility target for the returned primal certificate
        const EIG_TARGET: f64 = 5e-8;
        let gap_abs = (settings.sdp.gap_tol * 10.0).max(1e-9);

        let mut chunk_settings = settings.sdp.clone();
        chunk_settings.max_iter = 4; // rounds per chunk
        let chunks = (settings.sdp.max_iter / chunk_settings.max_iter).max(1);

        let mut warm_state: Option<WarmStart> = warm.cloned();
        let mut total_iters = 0usize;
        let mut outcome: Option<(f64, CMatrix, f64, f64, f64, SdpStatus, f64)> = None;
        let mut last_warm: Option<WarmStart> = None;

        for _ in 0..chunks {
            let sol = solve_with_start(&problem, &chunk_settings, warm_state.as_ref())?;
            total_iters += sol.iterations;

            // dual lift: −C = S₁ + Θ(S₂) + Λ⊗1 with S₁, S₂ ⪰ 0
            let s2 = &sol.psd_duals[1];
            let lambda = &sol.eq_duals[0];
            let s1 = &(&c_obj.scale_re(-1.0) - &partial_transpose(s2, &dims3, &[1, 2])?)
                - &kron(lambda, &CMatrix::identity(d));
            let lmin = s1.min_eig()?;
            let shift = (-lmin + 1e-12).max(0.0);
            let bound = -lambda.inner_re(&e_target) + shift * e_target.trace().re - 1.0;

            // primal correction onto the exact marginal slice
            let x_raw = &sol.variables[0];
            let marg = partial_trace(x_raw, &dims3, &[2])?;
            let delta = &e_target - &marg;
            let mut x_corr =
                x_raw + &kron(&delta, &CMatrix::identity(d)).scale_re(1.0 / d as f64);
            let mut psd_min = x_corr
                .min_eig()?
                .min(partial_transpose(&x_corr, &dims3, &[1, 2])?.min_eig()?);
            if psd_min < -EIG_TARGET && lambda_strict > 0.0 {
                let deficit = -psd_min;
                let theta =
                    ((deficit - 0.5 * EIG_TARGET) / (deficit + lambda_strict)).clamp(0.0, 1.0);
                x_corr = &x_corr.scale_re(1.0 - theta) + &x_strict.scale_re(theta);
                psd_min = x_corr
                    .min_eig()?
                    .min(partial_transpose(&x_corr, &dims3, &[1, 2])?.min_eig()?);
            }
            let primal = problem.objective_value(&[x_corr.clone()]);
            let cert_gap = (bound - primal) + (-psd_min).max(0.0);

            let tight = cert_gap <= gap_abs.max(0.02 * bound.abs());
            let feas_ok = psd_min >= -1e-7;
            last_warm = Some(sol.warm_start.clone());

            if sol.status == SdpStatus::Optimal || (tight && feas_ok) {
                outcome = Some((
                    bound,
                    x_corr,
                    primal,
                    psd_min,
                    cert_gap,
                    SdpStatus::Optimal,
                    leakage,
                ));
                break;
            }
            if matches!(sol.status, SdpStatus::Infeasible | SdpStatus::Unbounded) {
                outcome =
                    Some((bound, x_corr, primal, psd_min, cert_gap, sol.status, leakage));
                break;
            }
            outcome = Some((
                bound,
                x_corr,
                primal,
                psd_min,
                cert_gap,
                SdpStatus::NumericalTrouble,
                leakage,
            ));
            warm_state = Some(sol.warm_start);
        }

        let (value, x_final, primal, psd_min, cert_gap, status, leakage) =
            outcome.expect("at least one chunk runs");
        let warm_out = last_warm.expect("at least one chunk runs");

        let marg_residual = (&partial_trace(&x_final, &dims3, &[2])? - &e_target).max_abs();
        let status = WitnessStatus::Solver(status);
        let detected = status.is_conclusive() && value < -settings.eps_detect;
        let certificate = if settings.want_certificate {
            let expand = kron(&self.basis, &CMatrix::identity(d * d));
            Some(WitnessCertificate::ProcessTensor(x_final.conjugate_by(&expand)))
        } else {
            None
        };
        let stats = SolveStats {
            iterations: total_iters,
            gap: cert_gap,
            eq_residual: marg_residual.max(leakage),
            psd_min_eig: psd_min,
            primal_value: Some(primal),
        };
        let result = WitnessResult {
            kind: WitnessKind::Qm,
            value,
            status,
            detected,
            certificate,
            stats,
        };
        Ok((result, warm_out))
    }
}

/// One-shot witness evaluation.
pub fn s_qm(choi: &ChoiMatrix, settings: &WitnessSettings) -> Result<WitnessResult, WitnessError> {
    let engine = SqmEngine::for_choi(choi)?;
    engine.evaluate(choi, settings, None).map(|(r, _)| r)
}

/// Solve the full-space problem directly (no compression); used to
/// cross-check the compressed route.
pub fn s_qm_uncompressed(
    choi: &ChoiMatrix,
    settings: &WitnessSettings,
) -> Result<(f64, SdpStatus), WitnessError> {
    let p = build_sqm_problem(choi, 1)?;
    let sol = solve_with_start(&p, &settings.sdp, None)?;
    Ok((sol.objective, sol.status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{identity_channel, to_choi};

    #[test]
    fn full_problem_shape_for_qutrits() {
        let choi = to_choi(&identity_channel(3).unwrap());
        let p = build_sqm_problem(&choi, 1).unwrap();
        assert_eq!(p.var_count(), 1);
        assert_eq!(p.var_sides(), vec![81]);
        assert_eq!(p.psd_constraints().len(), 2);
        assert_eq!(p.psd_constraints()[0].side, 81);
        assert_eq!(p.psd_constraints()[1].side, 81);
        assert_eq!(p.eq_constraints().len(), 1);
        // one Hermitian 27×27 equality block = 729 real equations
        assert_eq!(p.eq_constraints()[0].side, 27);
        assert_eq!(p.eq_constraints()[0].side * p.eq_constraints()[0].side, 729);
        assert!(build_sqm_problem(&choi, 2).is_err());
    }

    #[test]
    fn objective_zero_at_separable_identity_tensor() {
        // X = Φ⁺-projector_{AB′} ⊗ Φ⁺-projector_{BC′} is the canonical
        // feasible point for the identity channel with objective 0.
        let d = 3;
        let choi = to_choi(&identity_channel(d).unwrap());
        let p = build_sqm_problem(&choi, 1).unwrap();
        let phi = crate::qmat::bell_vector(d).unwrap();
        let proj = phi.matmul(&phi.dagger());
        let x = kron(&proj, &proj);
        assert!((p.objective_value(&[x.clone()]) - 0.0).abs() < 1e-12);
        // and it satisfies the marginal constraint
        let eq = &p.eq_constraints()[0];
        assert!(eq.eval(&[x]).max_abs() < 1e-12);
    }

    #[test]
    fn marginal_forces_trace_d_squared() {
        // tr X is pinned to tr(E_u ⊗ 1_B) = d² by the equality block
        let d = 3;
        let choi = to_choi(&identity_channel(d).unwrap());
        let p = build_sqm_problem(&choi, 1).unwrap();
        let target = p.eq_constraints()[0].constant.scale_re(-1.0);
        assert!((target.trace().re - (d * d) as f64).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unital_input() {
        // amplitude-damping-like qutrit map: CPT but not unital
        let mut k0 = CMatrix::identity(3);
        k0[(2, 2)] = C64::new(0.6, 0.0);
        let mut k1 = CMatrix::zeros(3, 3);
        k1[(0, 2)] = C64::new(0.8, 0.0);
        let ch = crate::channels::Channel::new(vec![k0, k1]).unwrap();
        let choi = to_choi(&ch);
        assert!(matches!(
            build_sqm_problem(&choi, 1),
            Err(WitnessError::NotUnital { .. })
        ));
    }
}
