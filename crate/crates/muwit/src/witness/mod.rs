//! One-sided witnesses for non-mixed-unitary unital channels.
//!
//! Four witnesses are implemented. A strictly negative value certifies that
//! the channel has no mixed-unitary representation; a non-negative value is
//! inconclusive.
//!
//! * [`s_qm`] — the quantum-memory witness: maximize the Bell fidelity of
//!   the second marginal of a PPT process tensor compatible with the
//!   channel (an SDP over the four-party space A⊗B′⊗B⊗C′),
//! * [`s_mw`] — the Mendl–Wolf qutrit witness, evaluated exactly,
//! * [`w_relaxed`], [`w_r`] — cheaper dual-side relaxations of the
//!   quantum-memory witness,
//! * [`certify_from_mu`] — the constructive converse: a separable process
//!   tensor built from an explicit mixed-unitary decomposition, witnessing
//!   feasibility with objective zero.
//!
//! Reported values are certificate-backed: the quantum-memory witness
//! reports a corrected dual upper bound (sound for detection и never below
//! the true optimum on mixed-unitary inputs), while the relaxed witnesses
//! report the objective of an exactly feasible primal point.

mod certify;
mod mw;
mod relaxed;
mod scan;
mod sqm;

pub use certify::{certify_from_mu, CertifyReport};
pub use mw::{mendl_wolf_operator, s_mw};
pub use relaxed::{build_relaxed_problem, w_r, w_relaxed};
pub use scan::{normalize_reference, scan_family, FamilyScan, ScanPoint};
pub use sqm::{build_sqm_problem, s_qm, SqmEngine};

use crate::channels::ChannelError;
use crate::conic::{ConicError, SdpSettings, SdpStatus};
use crate::qmat::{CMatrix, QmatError};
use thiserror::Error;

/// Which witness a result came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    /// Quantum-memory SDP witness.
    Qm,
    /// Mendl–Wolf exact witness (qutrits only).
    Mw,
    /// Relaxed witness with both slack blocks.
    WRelaxed,
    /// Relaxed witness with the first slack block removed.
    WR,
}

impl WitnessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessKind::Qm => "qm",
            WitnessKind::Mw => "mw",
            WitnessKind::WRelaxed => "w",
            WitnessKind::WR => "wr",
        }
    }
}

impl std::str::FromStr for WitnessKind {
    type Err = WitnessError;
    fn from_str(s: &str) -> Result<Self, WitnessError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qm" => Ok(WitnessKind::Qm),
            "mw" => Ok(WitnessKind::Mw),
            "w" => Ok(WitnessKind::WRelaxed),
            "wr" | "w_r" => Ok(WitnessKind::WR),
            other => Err(WitnessError::InvalidInput(format!("unknown witness '{other}'"))),
        }
    }
}

/// How a witness value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessStatus {
    /// Closed-form evaluation.
    Exact,
    /// Outcome of an SDP solve.
    Solver(SdpStatus),
}

impl WitnessStatus {
    pub fn is_conclusive(&self) -> bool {
        matches!(self, WitnessStatus::Exact | WitnessStatus::Solver(SdpStatus::Optimal))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessStatus::Exact => "exact",
            WitnessStatus::Solver(SdpStatus::Optimal) => "optimal",
            WitnessStatus::Solver(SdpStatus::Infeasible) => "infeasible",
            WitnessStatus::Solver(SdpStatus::Unbounded) => "unbounded",
            WitnessStatus::Solver(SdpStatus::NumericalTrouble) => "numerical_trouble",
        }
    }
}

/// Optional certificate attached to a witness value.
#[derive(Debug, Clone)]
pub enum WitnessCertificate {
    /// Primal process tensor on the full A⊗B′⊗B⊗C′ space.
    ProcessTensor(CMatrix),
    /// Dual pair (W, P) of a relaxed witness.
    DualPair { w: CMatrix, p: CMatrix },
}

/// Numerical diagnostics of a witness evaluation.
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub gap: f64,
    /// Max-entry equality residual of the audited solution.
    pub eq_residual: f64,
    /// Min eigenvalue over the audited PSD expressions.
    pub psd_min_eig: f64,
    /// Primal objective at the (feasibility-corrected) solution, when the
    /// reported value is dual-side.
    pub primal_value: Option<f64>,
}

/// Signed witness value with its provenance.
#[derive(Debug, Clone)]
pub struct WitnessResult {
    pub kind: WitnessKind,
    pub value: f64,
    pub status: WitnessStatus,
    /// value < −ε_detect with a conclusive status.
    pub detected: bool,
    pub certificate: Option<WitnessCertificate>,
    pub stats: SolveStats,
}

/// Evaluation settings shared by the SDP-backed witnesses.
#[derive(Debug, Clone)]
pub struct WitnessSettings {
    pub sdp: SdpSettings,
    /// Detection threshold ε: only values below −ε count as detections.
    pub eps_detect: f64,
    /// Attach the primal/dual certificate to the result.
    pub want_certificate: bool,
}

impl Default for WitnessSettings {
    fn default() -> Self {
        Self { sdp: SdpSettings::default(), eps_detect: 1e-6, want_certificate: false }
    }
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("channel is not unital within {tol:.1e} (residual {residual:.3e})")]
    NotUnital { residual: f64, tol: f64 },
    #[error("channel is not trace preserving within {tol:.1e} (residual {residual:.3e})")]
    NotCpt { residual: f64, tol: f64 },
    #[error("the Mendl-Wolf witness is defined for qutrits, got d = {0}")]
    MendlWolfDimension(usize),
    #[error("symmetric-extension level {0} is not supported (only level 1)")]
    UnsupportedLevel(u8),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Qmat(#[from] QmatError),
}

/// Input-validation tolerance on CPT/unitality residuals of a Choi matrix
/// handed to a witness. Loose enough for integrator-extracted channels,
/// strict enough to reject wrong inputs.
pub const INPUT_TOL: f64 = 1e-6;

pub(crate) fn validate_unital_choi(
    choi: &crate::channels::ChoiMatrix,
) -> Result<(), WitnessError> {
    let cpt = choi.cpt_residual();
    if cpt > INPUT_TOL {
        return Err(WitnessError::NotCpt { residual: cpt, tol: INPUT_TOL });
    }
    let uni = choi.unitality_residual();
    if uni > INPUT_TOL {
        return Err(WitnessError::NotUnital { residual: uni, tol: INPUT_TOL });
    }
    Ok(())
}
