//! Constructive mixed-unitarity certificate: a separable process tensor
//! assembled from an explicit decomposition {p_i, U_i}.
//!
//! X = Σ_i I_i^{AB′} ⊗ F_i^{BC′}, where I_i is the Choi matrix of
//! ρ ↦ p_i U_i ρ U_i† and F_i the Choi matrix of the inverse rotation
//! ρ ↦ U_i† ρ U_i. This X is feasible for the quantum-memory SDP of the
//! mixed channel and attains objective zero.

use super::WitnessError;
use crate::channels::{to_choi, MuDecomposition};
use crate::qmat::{bell_sandwich, bell_vector, kron, partial_trace, partial_transpose, CMatrix, DimSpec};

/// Residuals of the assembled certificate against the witness constraints.
#[derive(Debug, Clone)]
pub struct CertifyReport {
    /// (1/d²)⟨Φ⁺|G|Φ⁺⟩ − 1; exactly 0 for a valid decomposition.
    pub objective: f64,
    /// Max entry of |Tr_C′ X − E_u ⊗ 1_B|.
    pub marginal_residual: f64,
    /// Max entry of |G − Φ⁺-projector| for the Bell-contracted marginal G.
    pub second_marginal_residual: f64,
    /// Min eigenvalue of X.
    pub psd_min_eig: f64,
    /// Min eigenvalue of the partial transpose of X over BC′.
    pub ppt_min_eig: f64,
}

impl CertifyReport {
    /// Largest constraint violation (eigenvalue deficits counted positive).
    pub fn max_residual(&self) -> f64 {
        self.objective
            .abs()
            .max(self.marginal_residual)
            .max(self.second_marginal_residual)
            .max((-self.psd_min_eig).max(0.0))
            .max((-self.ppt_min_eig).max(0.0))
    }
}

/// Choi column of a (scaled) unitary: (1⊗M)|Φ⁺⟩.
fn choi_vector(m: &CMatrix) -> CMatrix {
    let d = m.rows();
    let mut v = CMatrix::zeros(d * d, 1);
    for j in 0..d {
        for a in 0..d {
            v[(j * d + a, 0)] = m[(a, j)];
        }
    }
    v
}

/// Build the separable process tensor of a mixed-unitary decomposition and
/// verify the witness constraints on it.
pub fn certify_from_mu(dec: &MuDecomposition) -> Result<(CMatrix, CertifyReport), WitnessError> {
    let d = dec.dim();
    let n = d * d * d * d;
    let mut x = CMatrix::zeros(n, n);
    for (u, &p) in dec.unitaries().iter().zip(dec.probs().iter()) {
        let vi = choi_vector(u);
        let ii = vi.matmul(&vi.dagger()).scale_re(p);
        let vf = choi_vector(&u.dagger());
        let fi = vf.matmul(&vf.dagger());
        x += &kron(&ii, &fi);
    }

    let dims4 = DimSpec::new(&[d, d, d, d])?;
    let e_u = to_choi(&dec.to_channel());
    let marginal = partial_trace(&x, &dims4, &[3])?;
    let target = kron(e_u.matrix(), &CMatrix::identity(d));
    let marginal_residual = (&marginal - &target).max_abs();

    let g = bell_sandwich(&x, &dims4, (1, 2))?;
    let phi = bell_vector(d)?;
    let phi_proj = phi.matmul(&phi.dagger());
    let second_marginal_residual = (&g - &phi_proj).max_abs();
    let objective = phi.dagger().matmul(&g.matmul(&phi))[(0, 0)].re / (d * d) as f64 - 1.0;

    let psd_min_eig = x.min_eig()?;
    let ppt_min_eig = partial_transpose(&x, &dims4, &[2, 3])?.min_eig()?;

    Ok((
        x,
        CertifyReport {
            objective,
            marginal_residual,
            second_marginal_residual,
            psd_min_eig,
            ppt_min_eig,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_mu_channel, weyl_unitaries, MuDecomposition};

    #[test]
    fn identity_certificate_is_double_bell() {
        let dec =
            MuDecomposition::new(vec![CMatrix::identity(3)], vec![1.0]).unwrap();
        let (x, report) = certify_from_mu(&dec).unwrap();
        let phi = bell_vector(3).unwrap();
        let proj = phi.matmul(&phi.dagger());
        assert!((&x - &kron(&proj, &proj)).max_abs() < 1e-14);
        assert!(report.max_residual() < 1e-12);
    }

    #[test]
    fn nine_weyl_depolarizing_certificate() {
        let us = weyl_unitaries(3).unwrap();
        let probs = vec![1.0 / 9.0; 9];
        let dec = MuDecomposition::new(us, probs).unwrap();
        let (_, report) = certify_from_mu(&dec).unwrap();
        assert!(report.objective.abs() < 1e-12);
        assert!(report.max_residual() < 1e-12);
    }

    #[test]
    fn random_decomposition_is_ppt() {
        let (_, dec) = random_mu_channel(3, 5, 77).unwrap();
        let (_, report) = certify_from_mu(&dec).unwrap();
        assert!(report.psd_min_eig >= -1e-12);
        assert!(report.ppt_min_eig >= -1e-12, "separable X must be PPT");
        assert!(report.max_residual() < 1e-10);
    }
}
