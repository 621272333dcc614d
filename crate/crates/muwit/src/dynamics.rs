//! Time-continuous two-qubit decoherence from a three-qubit model: two
//! system qubits dephase through a shared environment qubit that is itself
//! damped by a Markovian bath.
//!
//! H = κ₁ σ_z⊗1⊗σ_z + κ₂ 1⊗σ_z⊗σ_z + 1⊗1⊗(Γ⃗·σ⃗), with GKSL dissipator
//! γ(LρL† − ½{L†L, ρ}), L = σ₋ on the environment qubit (the standard
//! trace-preserving generator). Tracing out the environment leaves a unital
//! two-qubit channel 𝓔_t whose Choi matrix is extracted along a time grid
//! and handed to the quantum-memory witness.

use crate::channels::ChoiMatrix;
use crate::qmat::{bell_vector, kron, partial_trace, CMatrix, DimSpec, C64, QmatError};
use crate::witness::{SqmEngine, WitnessError, WitnessResult, WitnessSettings};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("time grid must start at 0 and increase strictly")]
    BadTimeGrid,
    #[error("integration produced a non-physical state: {0}")]
    NonPhysical(String),
    #[error(transparent)]
    Qmat(#[from] QmatError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

/// Couplings and environment data of the three-qubit model.
#[derive(Debug, Clone)]
pub struct ThreeQubitModel {
    pub kappa1: f64,
    pub kappa2: f64,
    /// Pauli-noise direction Γ⃗ on the environment qubit.
    pub pauli_noise: [f64; 3],
    /// Damping rate γ ≥ 0 of the environment qubit.
    pub damping: f64,
    /// Initial environment state (2×2 density matrix).
    pub env0: CMatrix,
}

impl ThreeQubitModel {
    pub fn new(
        kappa1: f64,
        kappa2: f64,
        pauli_noise: [f64; 3],
        damping: f64,
        env0: CMatrix,
    ) -> Result<Self, DynamicsError> {
        if damping < 0.0 {
            return Err(DynamicsError::InvalidModel("damping must be ≥ 0".into()));
        }
        if env0.rows() != 2 || env0.cols() != 2 {
            return Err(DynamicsError::InvalidModel("env0 must be 2×2".into()));
        }
        if env0.hermiticity_residual() > 1e-12
            || (env0.trace().re - 1.0).abs() > 1e-12
            || env0.trace().im.abs() > 1e-12
            || !env0.is_psd(1e-12)
        {
            return Err(DynamicsError::InvalidModel(
                "env0 must be a Hermitian PSD matrix of unit trace".into(),
            ));
        }
        Ok(Self { kappa1, kappa2, pauli_noise, damping, env0 })
    }

    /// Model with the environment in its damping fixed point |0⟩⟨0|.
    pub fn with_ground_env(
        kappa1: f64,
        kappa2: f64,
        pauli_noise: [f64; 3],
        damping: f64,
    ) -> Result<Self, DynamicsError> {
        let mut env0 = CMatrix::zeros(2, 2);
        env0[(0, 0)] = C64::new(1.0, 0.0);
        Self::new(kappa1, kappa2, pauli_noise, damping, env0)
    }
}

fn pauli(which: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    match which {
        0 => {
            m[(0, 1)] = C64::new(1.0, 0.0);
            m[(1, 0)] = C64::new(1.0, 0.0);
        }
        1 => {
            m[(0, 1)] = C64::new(0.0, -1.0);
            m[(1, 0)] = C64::new(0.0, 1.0);
        }
        _ => {
            m[(0, 0)] = C64::new(1.0, 0.0);
            m[(1, 1)] = C64::new(-1.0, 0.0);
        }
    }
    m
}

/// σ₋ = |0⟩⟨1| on the environment qubit.
fn sigma_minus() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m
}

/// The 8×8 Hamiltonian on sys1⊗sys2⊗env.
pub fn hamiltonian(m: &ThreeQubitModel) -> CMatrix {
    let i2 = CMatrix::identity(2);
    let sz = pauli(2);
    let mut h = kron(&kron(&sz, &i2), &sz).scale_re(m.kappa1);
    h += &kron(&kron(&i2, &sz), &sz).scale_re(m.kappa2);
    let mut env = CMatrix::zeros(2, 2);
    for (k, &g) in m.pauli_noise.iter().enumerate() {
        env += &pauli(k).scale_re(g);
    }
    h += &kron(&CMatrix::identity(4), &env);
    h
}

/// GKSL right-hand side ρ̇ = −i[H, ρ] + γ(LρL† − ½{L†L, ρ}) on the
/// three-qubit space, with L = 1⊗1⊗σ₋.
pub fn lindblad_rhs(m: &ThreeQubitModel, rho: &CMatrix) -> CMatrix {
    let h = hamiltonian(m);
    let l = kron(&CMatrix::identity(4), &sigma_minus());
    rhs_with(&h, &l, m.damping, rho)
}

fn rhs_with(h: &CMatrix, l: &CMatrix, gamma: f64, rho: &CMatrix) -> CMatrix {
    let comm = &h.matmul(rho) - &rho.matmul(h);
    let mut out = comm.scale(C64::new(0.0, -1.0));
    if gamma != 0.0 {
        let l_rho = l.matmul(rho);
        let jump = l_rho.matmul(&l.dagger());
        let ldl = l.dagger().matmul(l);
        let anti = &ldl.matmul(rho) + &rho.matmul(&ldl);
        out += &(&jump - &anti.scale_re(0.5)).scale_re(gamma);
    }
    out
}

/// Time-ordered Choi matrices of the reduced two-qubit channel.
#[derive(Debug, Clone)]
pub struct ChoiTrajectory {
    pub times: Vec<f64>,
    pub chois: Vec<ChoiMatrix>,
    pub cpt_residuals: Vec<f64>,
    pub unitality_residuals: Vec<f64>,
}

/// Fixed-step integrator control: the step obeys (‖H‖₂ + γ)·h ≤ `step_scale`.
#[derive(Debug, Clone)]
pub struct IntegratorSettings {
    pub step_scale: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        // small enough that the fourth-order error stays below the 1e-8
        // trajectory audits over t ≲ 5
        Self { step_scale: 0.012 }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), DynamicsError> {
    if t_grid.is_empty() || t_grid[0] != 0.0 || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DynamicsError::BadTimeGrid);
    }
    Ok(())
}

/// Initial 32×32 composite state: unnormalized Bell pair between the
/// ancilla copy and the system, tensored with the environment state.
fn initial_state(m: &ThreeQubitModel) -> CMatrix {
    let phi = bell_vector(4).expect("d = 4");
    let proj = phi.matmul(&phi.dagger());
    kron(&proj, &m.env0)
}

/// Integrate the dilated dynamics with a fixed-step fourth-order scheme and
/// extract the unnormalized 16×16 Choi matrix at each grid time.
pub fn propagate_choi(
    m: &ThreeQubitModel,
    t_grid: &[f64],
    settings: &IntegratorSettings,
) -> Result<ChoiTrajectory, DynamicsError> {
    check_grid(t_grid)?;
    let h8 = hamiltonian(m);
    let h_norm = h8.eigh()?.values.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
    let h_max = settings.step_scale / (h_norm + m.damping).max(1e-12);

    let h32 = kron(&CMatrix::identity(4), &h8);
    let l32 = kron(&CMatrix::identity(16), &sigma_minus());
    let mut rho = initial_state(m);

    let dims = DimSpec::new(&[16, 2])?;
    let mut out = ChoiTrajectory {
        times: Vec::with_capacity(t_grid.len()),
        chois: Vec::with_capacity(t_grid.len()),
        cpt_residuals: Vec::with_capacity(t_grid.len()),
        unitality_residuals: Vec::with_capacity(t_grid.len()),
    };
    record(&mut out, 0.0, &rho, &dims)?;
    for win in t_grid.windows(2) {
        let span = win[1] - win[0];
        let steps = (span / h_max).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            rho = rk4_step(&h32, &l32, m.damping, &rho, h);
        }
        record(&mut out, win[1], &rho, &dims)?;
    }
    Ok(out)
}

fn record(
    out: &mut ChoiTrajectory,
    t: f64,
    rho: &CMatrix,
    dims: &DimSpec,
) -> Result<(), DynamicsError> {
    let reduced = partial_trace(rho, dims, &[1])?;
    if !reduced.is_finite() {
        return Err(DynamicsError::NonPhysical(format!("non-finite state at t = {t}")));
    }
    let choi = ChoiMatrix::from_matrix(4, reduced)
        .map_err(|e| DynamicsError::NonPhysical(e.to_string()))?;
    out.times.push(t);
    out.cpt_residuals.push(choi.cpt_residual());
    out.unitality_residuals.push(choi.unitality_residual());
    out.chois.push(choi);
    Ok(())
}

fn rk4_step(h: &CMatrix, l: &CMatrix, gamma: f64, rho: &CMatrix, dt: f64) -> CMatrix {
    let k1 = rhs_with(h, l, gamma, rho);
    let k2 = rhs_with(h, l, gamma, &(rho + &k1.scale_re(dt / 2.0)));
    let k3 = rhs_with(h, l, gamma, &(rho + &k2.scale_re(dt / 2.0)));
    let k4 = rhs_with(h, l, gamma, &(rho + &k3.scale_re(dt)));
    let mut incr = k1;
    incr += &k2.scale_re(2.0);
    incr += &k3.scale_re(2.0);
    incr += &k4;
    rho + &incr.scale_re(dt / 6.0)
}

/// Closed-form trajectory for γ = 0: conjugation by exp(−iHt), used as an
/// integrator oracle.
pub fn propagate_choi_exact(
    m: &ThreeQubitModel,
    t_grid: &[f64],
) -> Result<ChoiTrajectory, DynamicsError> {
    check_grid(t_grid)?;
    if m.damping != 0.0 {
        return Err(DynamicsError::InvalidModel(
            "the closed-form propagator applies to γ = 0 only".into(),
        ));
    }
    let h8 = hamiltonian(m);
    let eig = h8.eigh()?;
    let rho0 = initial_state(m);
    let dims = DimSpec::new(&[16, 2])?;
    let mut out = ChoiTrajectory {
        times: Vec::new(),
        chois: Vec::new(),
        cpt_residuals: Vec::new(),
        unitality_residuals: Vec::new(),
    };
    for &t in t_grid {
        let u8 = eig.apply_spectral_complex(|l| C64::from_polar(1.0, -l * t));
        let u32 = kron(&CMatrix::identity(4), &u8);
        let rho = rho0.conjugate_by(&u32);
        record(&mut out, t, &rho, &dims)?;
    }
    // recorded times were pushed as grid values already
    out.times = t_grid.to_vec();
    Ok(out)
}

/// One row of a time/damping sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub t: f64,
    pub gamma: f64,
    pub result: WitnessResult,
    pub cpt_residual: f64,
    pub unitality_residual: f64,
}

/// Propagate for every damping value and evaluate the quantum-memory
/// witness along the time grid. Rows come out γ-major, then time-ordered;
/// distinct damping values run concurrently.
pub fn sweep_witness(
    base: &ThreeQubitModel,
    t_grid: &[f64],
    gamma_list: &[f64],
    integrator: &IntegratorSettings,
    witness: &WitnessSettings,
) -> Result<Vec<SweepRow>, DynamicsError> {
    check_grid(t_grid)?;
    let per_gamma: Vec<Result<Vec<SweepRow>, DynamicsError>> = gamma_list
        .par_iter()
        .map(|&gamma| {
            let model = ThreeQubitModel {
                damping: gamma,
                env0: base.env0.clone(),
                ..*base
            };
            let traj = propagate_choi(&model, t_grid, integrator)?;
            let refs: Vec<&ChoiMatrix> = traj.chois.iter().collect();
            let engine = SqmEngine::for_family(&refs)?;
            let mut warm = None;
            let mut rows = Vec::with_capacity(traj.times.len());
            for (k, choi) in traj.chois.iter().enumerate() {
                let (result, w) = engine.evaluate(choi, witness, warm.as_ref())?;
                warm = Some(w);
                rows.push(SweepRow {
                    t: traj.times[k],
                    gamma,
                    result,
                    cpt_residual: traj.cpt_residuals[k],
                    unitality_residual: traj.unitality_residuals[k],
                });
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_gamma {
        out.extend(rows?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::test_support::rand_hermitian;

    fn model(k1: f64, k2: f64, g: [f64; 3], gamma: f64) -> ThreeQubitModel {
        ThreeQubitModel::with_ground_env(k1, k2, g, gamma).unwrap()
    }

    #[test]
    fn hamiltonian_zero_and_pure_noise() {
        let m = model(0.0, 0.0, [0.0; 3], 0.0);
        assert_eq!(hamiltonian(&m).max_abs(), 0.0);
        let m = model(0.0, 0.0, [0.0, 0.0, 1.0], 0.0);
        let h = hamiltonian(&m);
        let expect = kron(&CMatrix::identity(4), &pauli(2));
        assert!((&h - &expect).max_abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let m = model(0.37, -1.2, [0.4, 0.9, -0.3], 0.0);
        assert!(hamiltonian(&m).hermiticity_residual() < 1e-15);
    }

    #[test]
    fn rhs_damping_term_on_maximally_mixed() {
        // κ = Γ = 0, ρ = 1/8: LρL† − ½{L†L, ρ} = (|0⟩⟨0| − |1⟩⟨1|)/8 on the
        // environment factor, so ρ̇ = (γ/8)·1₄⊗σ_z
        let gamma = 0.7;
        let m = model(0.0, 0.0, [0.0; 3], gamma);
        let rho = CMatrix::identity(8).scale_re(1.0 / 8.0);
        let dot = lindblad_rhs(&m, &rho);
        let expect = kron(&CMatrix::identity(4), &pauli(2)).scale_re(gamma / 8.0);
        assert!((&dot - &expect).max_abs() < 1e-15);
        assert!(dot.trace().norm() < 1e-15);
    }

    #[test]
    fn rhs_env_ground_state_is_fixed_point() {
        let m = model(0.0, 0.0, [0.0; 3], 1.3);
        let mut env = CMatrix::zeros(2, 2);
        env[(0, 0)] = C64::new(1.0, 0.0);
        let rho = kron(&rand_hermitian(4, 5), &env);
        assert!(lindblad_rhs(&m, &rho).max_abs() < 1e-14);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let m = model(0.4, 1.2, [0.4, 0.0, 1.0], 0.5);
        let rho = rand_hermitian(8, 11);
        let dot = lindblad_rhs(&m, &rho);
        assert!(dot.trace().norm() <= 1e-14);
        assert!(dot.hermiticity_residual() < 1e-13);
    }

    #[test]
    fn trajectory_starts_at_bell_projector() {
        let m = model(0.4, 1.2, [0.4, 0.0, 1.0], 0.5);
        let traj = propagate_choi(&m, &[0.0, 0.1], &Default::default()).unwrap();
        let phi = bell_vector(4).unwrap();
        let proj = phi.matmul(&phi.dagger());
        assert!((traj.chois[0].matrix() - &proj).max_abs() < 1e-14);
        assert!(traj.cpt_residuals.iter().all(|&r| r < 1e-8));
        assert!(traj.unitality_residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn unitary_case_matches_phase_oracle() {
        // γ = 0, Γ = 0, ground environment: 𝓔_t is conjugation by
        // exp(−i t(κ₁σ_z⊗1 + κ₂1⊗σ_z)); rank-1 Choi of trace 4
        let m = model(0.4, 1.2, [0.0; 3], 0.0);
        let grid = [0.0, 0.35, 0.8];
        let traj = propagate_choi(&m, &grid, &Default::default()).unwrap();
        let sz = pauli(2);
        let hsys = &kron(&sz, &CMatrix::identity(2)).scale_re(0.4)
            + &kron(&CMatrix::identity(2), &sz).scale_re(1.2);
        for (k, &t) in grid.iter().enumerate() {
            let u = hsys
                .eigh()
                .unwrap()
                .apply_spectral_complex(|l| C64::from_polar(1.0, -l * t));
            let mut v = CMatrix::zeros(16, 1);
            for j in 0..4 {
                for a in 0..4 {
                    v[(j * 4 + a, 0)] = u[(a, j)];
                }
            }
            let expect = v.matmul(&v.dagger());
            assert!((traj.chois[k].matrix() - &expect).max_abs() < 1e-8, "t = {t}");
            let tr = traj.chois[k].matrix().trace();
            assert!((tr.re - 4.0).abs() < 1e-10 && tr.im.abs() < 1e-12);
        }
    }

    #[test]
    fn step_halving_changes_little() {
        let m = model(0.4, 1.2, [0.4, 0.0, 1.0], 1.0);
        let grid = [0.0, 0.5, 1.0];
        let coarse = propagate_choi(&m, &grid, &IntegratorSettings { step_scale: 0.012 }).unwrap();
        let fine = propagate_choi(&m, &grid, &IntegratorSettings { step_scale: 0.006 }).unwrap();
        for (a, b) in coarse.chois.iter().zip(fine.chois.iter()) {
            assert!((a.matrix() - b.matrix()).max_abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ThreeQubitModel::with_ground_env(0.1, 0.1, [0.0; 3], -0.5).is_err());
        let m = model(0.1, 0.1, [0.0; 3], 0.0);
        assert!(propagate_choi(&m, &[0.1, 0.2], &Default::default()).is_err());
        assert!(propagate_choi(&m, &[], &Default::default()).is_err());
        let bad_env = CMatrix::identity(2); // trace 2
        assert!(ThreeQubitModel::new(0.1, 0.1, [0.0; 3], 0.1, bad_env).is_err());
    }
}
