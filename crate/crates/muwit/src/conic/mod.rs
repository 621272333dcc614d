//! Solver-agnostic SDP problem model and a first-order conic solver.
//!
//! Problems are stated over named Hermitian matrix variables with affine
//! PSD and equality constraints. Hermitian matrices form a real vector
//! space (diagonal plus real/imag off-diagonal pairs — see [`params`]);
//! all expressions here are real-linear maps on that space, so the solver
//! works on complex Hermitian blocks directly and never forms a real
//! embedding of the cone.
//!
//! The solver is an over-relaxed consensus ADMM: one slack block per
//! constraint, eigenvalue-clipping projections for the PSD cones, and a
//! conjugate-gradient solve of the (constant, well-conditioned) normal
//! equations for the variable update. Solutions report both the primal and
//! the dual objective, and every `Optimal` result is re-audited by
//! evaluating the constraints on the returned matrices.

mod audit;
mod model;
pub mod params;
mod solver;

pub use audit::{audit_solution, AuditReport};
pub use model::{dump_problem, AffineExpr, LinOp, LinTerm, SdpProblem, Sense, VarRef};
pub use params::{embed_real, herm_to_params, params_to_herm};
pub use solver::{solve, solve_with_start, SdpSettings, SdpSolution, SdpStatus, WarmStart};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("unknown variable reference")]
    UnknownVariable,
    #[error("expression shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("constant block of '{label}' is not Hermitian (residual {residual:.3e})")]
    NonHermitianConstant { label: String, residual: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Qmat(#[from] crate::qmat::QmatError),
}
