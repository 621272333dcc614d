//! Post-solve feasibility audit, independent of the solver's bookkeeping.

use super::model::{SdpProblem, Sense};
use crate::qmat::CMatrix;

/// Residuals recomputed from the problem data and the returned matrices.
#[derive(Debug, Clone)]
pub struct AuditReport {
    /// Max entry of |expr| over all equality constraints (0 when none).
    pub eq_max_residual: f64,
    /// Min eigenvalue over all PSD constraint expressions (+∞ when none).
    pub psd_min_eig: f64,
    /// ‖c − Σ L*y‖ relative to ‖c‖, with the returned duals.
    pub dual_stationarity: f64,
    /// Min eigenvalue over the returned PSD-cone duals (+∞ when none).
    pub dual_psd_min_eig: f64,
}

/// Re-evaluate all constraints and the dual stationarity condition on the
/// returned variables/duals.
pub fn audit_solution(
    p: &SdpProblem,
    vars: &[CMatrix],
    psd_duals: &[CMatrix],
    eq_duals: &[CMatrix],
) -> AuditReport {
    let mut eq_max = 0.0f64;
    for expr in p.eq_constraints() {
        eq_max = eq_max.max(expr.eval(vars).max_abs());
    }
    let mut psd_min = f64::INFINITY;
    for expr in p.psd_constraints() {
        let l = expr.eval(vars).min_eig().unwrap_or(f64::NEG_INFINITY);
        psd_min = psd_min.min(l);
    }
    let mut dual_psd_min = f64::INFINITY;
    for y in psd_duals {
        dual_psd_min = dual_psd_min.min(y.min_eig().unwrap_or(f64::NEG_INFINITY));
    }

    // stationarity of the user-sense Lagrangian: c = Σ L*y
    let sides = p.var_sides();
    let mut aty: Vec<CMatrix> = sides.iter().map(|&s| CMatrix::zeros(s, s)).collect();
    for (expr, y) in p
        .psd_constraints()
        .iter()
        .zip(psd_duals.iter())
        .chain(p.eq_constraints().iter().zip(eq_duals.iter()))
    {
        expr.adjoint_accumulate(y, &mut aty);
    }
    // duals are stored for the internal minimization: σ·c = Σ L*y
    let sign = match p.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut c: Vec<CMatrix> = sides.iter().map(|&s| CMatrix::zeros(s, s)).collect();
    for (v, coeff) in p.objective_terms() {
        c[v.0] += &coeff.scale_re(sign);
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (cv, av) in c.iter().zip(aty.iter()) {
        num += (cv - av).frobenius_norm().powi(2);
        den += cv.frobenius_norm().powi(2);
    }
    let dual_stationarity = num.sqrt() / (1.0 + den.sqrt());

    AuditReport {
        eq_max_residual: eq_max,
        psd_min_eig: psd_min,
        dual_stationarity,
        dual_psd_min_eig: dual_psd_min,
    }
}
