//! First-order conic solver: over-relaxed consensus ADMM.
//!
//! One slack block per constraint. The variable update solves the constant
//! normal equations Σ L*L x = rhs by conjugate gradients (the operators
//! appearing here are near-isometries, so a handful of CG steps reach
//! machine precision); the slack update projects onto each cone through a
//! Hermitian eigendecomposition. Scaled duals come for free: the PSD-cone
//! duals are exactly PSD at every iteration.

use super::audit::{audit_solution, AuditReport};
use super::model::{AffineExpr, SdpProblem, Sense};
use super::ConicError;
use crate::qmat::CMatrix;

/// Solver status reported to callers. Anything other than `Optimal` must be
/// handled explicitly; witnesses never convert a failed solve into a
/// detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone)]
pub struct SdpSettings {
    /// Primal/dual feasibility tolerance on normalized residuals.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Outer rounds; each round runs a fixed block of splitting iterations.
    pub max_iter: usize,
    /// Over-relaxation parameter in (0, 2].
    pub relax_alpha: f64,
    /// Initial penalty parameter.
    pub rho0: f64,
    /// Anderson-acceleration window on the splitting fixed point;
    /// 0 disables acceleration.
    pub aa_depth: usize,
    /// Apply the acceleration every this many iterations.
    pub aa_every: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            relax_alpha: 1.7,
            rho0: 1.0,
            aa_depth: 8,
            aa_every: 2,
        }
    }
}

const ROUND: usize = 100; // inner iterations per outer round
const CHECK_EVERY: usize = 25;
const ADAPT_EVERY: usize = 50;
const CERT_EVERY: usize = 100;

fn trace_enabled() -> bool {
    static FLAG: once_cell::sync::OnceCell<bool> = once_cell::sync::OnceCell::new();
    *FLAG.get_or_init(|| std::env::var("MUWIT_SDP_TRACE").is_ok_and(|v| v == "1"))
}

/// Opaque solver state for warm-starting a related problem instance
/// (same shapes; typically the neighbouring point of a parameter sweep).
#[derive(Debug, Clone)]
pub struct WarmStart {
    x: Vec<CMatrix>,
    z: Vec<CMatrix>,
    u: Vec<CMatrix>,
    rho: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Objective value at the returned variables (user sense).
    pub objective: f64,
    /// Dual bound (lower bound when minimizing, upper when maximizing).
    pub dual_objective: f64,
    pub variables: Vec<CMatrix>,
    /// Duals of the PSD constraints; PSD by construction. Together with
    /// `eq_duals` they satisfy σ·c ≈ Σ L*y where σ is +1 for minimization
    /// and −1 for maximization.
    pub psd_duals: Vec<CMatrix>,
    /// Duals of the equality constraints.
    pub eq_duals: Vec<CMatrix>,
    /// |internal primal − dual| at termination.
    pub gap: f64,
    pub iterations: usize,
    /// Independent post-solve feasibility audit.
    pub audit: AuditReport,
    pub warm_start: WarmStart,
}

pub fn solve(p: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution, ConicError> {
    solve_with_start(p, settings, None)
}

struct VecOps;

impl VecOps {
    fn zeros_like(sides: &[usize]) -> Vec<CMatrix> {
        sides.iter().map(|&s| CMatrix::zeros(s, s)).collect()
    }

    fn dot(a: &[CMatrix], b: &[CMatrix]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x.inner_re(y)).sum()
    }

    fn norm(a: &[CMatrix]) -> f64 {
        Self::dot(a, a).sqrt()
    }

    fn axpy(alpha: f64, x: &[CMatrix], y: &mut [CMatrix]) {
        for (yi, xi) in y.iter_mut().zip(x.iter()) {
            *yi += &xi.scale_re(alpha);
        }
    }

    fn scale(a: &mut [CMatrix], s: f64) {
        for m in a.iter_mut() {
            *m = m.scale_re(s);
        }
    }
}

struct Workspace<'a> {
    problem: &'a SdpProblem,
    cones: Vec<(&'a AffineExpr, bool)>, // (expr, is_psd)
    c_int: Vec<CMatrix>,                // internal minimization objective
    sign: f64,                          // +1 minimize, −1 maximize
    var_sides: Vec<usize>,
    reg: f64,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        let var_sides = p.var_sides();
        let sign = match p.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut c_int = VecOps::zeros_like(&var_sides);
        for (v, coeff) in p.objective_terms() {
            c_int[v.0] += &coeff.scale_re(sign);
        }
        let cones: Vec<(&AffineExpr, bool)> = p
            .psd_constraints()
            .iter()
            .map(|e| (e, true))
            .chain(p.eq_constraints().iter().map(|e| (e, false)))
            .collect();
        Self { problem: p, cones, c_int, sign, var_sides, reg: 1e-12 }
    }

    /// Σ_k L_k* L_k x + reg·x.
    fn normal_apply(&self, x: &[CMatrix], out: &mut [CMatrix]) {
        for (o, xi) in out.iter_mut().zip(x.iter()) {
            *o = xi.scale_re(self.reg);
        }
        for (expr, _) in &self.cones {
            let image = expr.apply_homogeneous(x);
            expr.adjoint_accumulate(&image, out);
        }
    }

    fn cg(&self, rhs: &[CMatrix], x: &mut Vec<CMatrix>) -> usize {
        let mut ax = VecOps::zeros_like(&self.var_sides);
        self.normal_apply(x, &mut ax);
        let mut r: Vec<CMatrix> = rhs
            .iter()
            .zip(ax.iter())
            .map(|(b, a)| b - a)
            .collect();
        let rhs_norm = VecOps::norm(rhs).max(1e-300);
        let tol = 1e-12 * rhs_norm;
        let mut rsq = VecOps::dot(&r, &r);
        if rsq.sqrt() <= tol {
            return 0;
        }
        let mut p = r.clone();
        let mut ap = VecOps::zeros_like(&self.var_sides);
        let mut used = 0usize;
        for _ in 0..400 {
            used += 1;
            self.normal_apply(&p, &mut ap);
            let denom = VecOps::dot(&p, &ap);
            if denom <= 0.0 {
                break;
            }
            let alpha = rsq / denom;
            VecOps::axpy(alpha, &p, x);
            VecOps::axpy(-alpha, &ap, &mut r);
            let rsq_new = VecOps::dot(&r, &r);
            if rsq_new.sqrt() <= tol {
                break;
            }
            let beta = rsq_new / rsq;
            rsq = rsq_new;
            for (pi, ri) in p.iter_mut().zip(r.iter()) {
                *pi = &pi.scale_re(beta) + ri;
            }
        }
        used
    }

    /// Projection onto the cone; returns (projected, was_psd_cone).
    fn project(&self, k: usize, w: &CMatrix) -> CMatrix {
        if self.cones[k].1 {
            psd_project(w)
        } else {
            CMatrix::zeros(w.rows(), w.cols())
        }
    }
}

/// Eigenvalue clipping onto the PSD cone, assembling only the positive part.
fn psd_project(w: &CMatrix) -> CMatrix {
    let n = w.rows();
    let e = match w.hermitize().eigh() {
        Ok(e) => e,
        Err(_) => return CMatrix::zeros(n, n),
    };
    let pos: Vec<usize> = (0..n).filter(|&k| e.values[k] > 0.0).collect();
    if pos.is_empty() {
        return CMatrix::zeros(n, n);
    }
    if pos.len() == n && e.values[0] >= 0.0 {
        return w.hermitize();
    }
    let mut wmat = CMatrix::zeros(n, pos.len());
    for (col, &k) in pos.iter().enumerate() {
        let s = e.values[k].sqrt();
        for i in 0..n {
            wmat[(i, col)] = e.vectors[(i, k)].scale(s);
        }
    }
    wmat.matmul(&wmat.dagger())
}

fn gather_state(z: &[CMatrix], u: &[CMatrix]) -> Vec<f64> {
    let mut out = Vec::new();
    for m in z.iter().chain(u.iter()) {
        for c in m.data() {
            out.push(c.re);
            out.push(c.im);
        }
    }
    out
}

fn scatter_state(s: &[f64], z: &mut [CMatrix], u: &mut [CMatrix]) {
    let mut k = 0usize;
    for m in z.iter_mut().chain(u.iter_mut()) {
        for c in m.data_mut() {
            *c = crate::qmat::C64::new(s[k], s[k + 1]);
            k += 2;
        }
    }
    debug_assert_eq!(k, s.len());
}

/// Type-II Anderson acceleration with basic safeguards: extrapolate the
/// splitting fixed point from a sliding window of difference columns;
/// reject steps with ill-conditioned mixing weights or growing residuals.
/// Difference columns and their Gram matrix are maintained incrementally.
struct Anderson {
    depth: usize,
    prev_s: Option<Vec<f64>>,
    prev_f: Option<Vec<f64>>,
    /// columns Δs_j + Δf_j (the combination entering the update)
    dsf: std::collections::VecDeque<Vec<f64>>,
    /// columns Δf_j
    df: std::collections::VecDeque<Vec<f64>>,
    best_rnorm: f64,
}

impl Anderson {
    fn new(depth: usize, _dim: usize) -> Self {
        Self {
            depth,
            prev_s: None,
            prev_f: None,
            dsf: std::collections::VecDeque::new(),
            df: std::collections::VecDeque::new(),
            best_rnorm: f64::INFINITY,
        }
    }

    fn reset(&mut self) {
        self.prev_s = None;
        self.prev_f = None;
        self.dsf.clear();
        self.df.clear();
        self.best_rnorm = f64::INFINITY;
    }

    /// Given the iteration input `s` and plain output `t = T(s)`, return a
    /// mixed next state, or None to take the plain step.
    fn propose(&mut self, s: &[f64], t: &[f64]) -> Option<Vec<f64>> {
        let f: Vec<f64> = t.iter().zip(s.iter()).map(|(a, b)| a - b).collect();
        let rnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !rnorm.is_finite() || rnorm > 1e3 * self.best_rnorm {
            self.reset();
        }
        self.best_rnorm = self.best_rnorm.min(rnorm);

        if let (Some(ps), Some(pf)) = (&self.prev_s, &self.prev_f) {
            let mut dfi = Vec::with_capacity(f.len());
            let mut dsfi = Vec::with_capacity(f.len());
            for i in 0..f.len() {
                let dfv = f[i] - pf[i];
                dfi.push(dfv);
                dsfi.push(s[i] - ps[i] + dfv);
            }
            self.df.push_back(dfi);
            self.dsf.push_back(dsfi);
            if self.df.len() > self.depth {
                self.df.pop_front();
                self.dsf.pop_front();
            }
        }
        self.prev_s = Some(s.to_vec());
        self.prev_f = Some(f.clone());

        let m = self.df.len();
        if m == 0 {
            return None;
        }
        // normal equations for min ‖f − ΔF γ‖
        let mut gram = vec![0.0f64; m * m];
        let mut rhs = vec![0.0f64; m];
        for a in 0..m {
            let ca = &self.df[a];
            for b in a..m {
                let cb = &self.df[b];
                let acc: f64 = ca.iter().zip(cb.iter()).map(|(x, y)| x * y).sum();
                gram[a * m + b] = acc;
                gram[b * m + a] = acc;
            }
            rhs[a] = ca.iter().zip(f.iter()).map(|(x, y)| x * y).sum();
        }
        let trace: f64 = (0..m).map(|a| gram[a * m + a]).sum();
        let ridge = 1e-12 * trace.max(1e-300);
        for a in 0..m {
            gram[a * m + a] += ridge;
        }
        let gamma = solve_small_spd(&mut gram, &mut rhs, m)?;
        let gnorm = gamma.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !gnorm.is_finite() || gnorm > 1e4 {
            self.reset();
            return None;
        }
        // s_next = t − Σ γ_j (Δs_j + Δf_j)
        let mut out = t.to_vec();
        for (j, &g) in gamma.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.dsf[j].iter()) {
                *o -= g * c;
            }
        }
        Some(out)
    }
}

/// In-place Cholesky solve of a small SPD system; None when not PD.
fn solve_small_spd(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for k in 0..n {
        let mut d = a[k * n + k];
        for j in 0..k {
            d -= a[k * n + j] * a[k * n + j];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[k * n + k] = d;
        for i in (k + 1)..n {
            let mut v = a[i * n + k];
            for j in 0..k {
                v -= a[i * n + j] * a[k * n + j];
            }
            a[i * n + k] = v / d;
        }
    }
    for i in 0..n {
        let mut v = b[i];
        for j in 0..i {
            v -= a[i * n + j] * b[j];
        }
        b[i] = v / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for j in (i + 1)..n {
            v -= a[j * n + i] * b[j];
        }
        b[i] = v / a[i * n + i];
    }
    Some(b.to_vec())
}

struct Residuals {
    primal: f64,
    dual: f64,
    gap_rel: f64,
    gap_abs: f64,
    p_int: f64,
    g_int: f64,
}

fn compute_residuals(
    ws: &Workspace,
    x: &[CMatrix],
    z: &[CMatrix],
    u: &[CMatrix],
    rho: f64,
) -> Residuals {
    let mut rp = 0.0f64;
    let mut g_int = 0.0f64;
    let mut aty = VecOps::zeros_like(&ws.var_sides);
    for (k, (expr, _)) in ws.cones.iter().enumerate() {
        let e = expr.eval(x);
        let diff = (&e - &z[k]).frobenius_norm();
        let scale = 1.0 + e.frobenius_norm().max(z[k].frobenius_norm());
        rp = rp.max(diff / scale);
        // y_k = −ρ u_k
        let y = u[k].scale_re(-rho);
        g_int -= y.inner_re(&expr.constant);
        expr.adjoint_accumulate(&y, &mut aty);
    }
    let mut rd_num = 0.0f64;
    let mut aty_norm = 0.0f64;
    for (cv, av) in ws.c_int.iter().zip(aty.iter()) {
        rd_num += (cv - av).frobenius_norm().powi(2);
        aty_norm += av.frobenius_norm().powi(2);
    }
    let c_norm = VecOps::norm(&ws.c_int);
    let rd = rd_num.sqrt() / (1.0 + c_norm.max(aty_norm.sqrt()));
    let p_int = VecOps::dot(&ws.c_int, &x.to_vec());
    let gap_abs = (p_int - g_int).abs();
    let gap_rel = gap_abs / (1.0 + p_int.abs().max(g_int.abs()));
    Residuals { primal: rp, dual: rd, gap_rel, gap_abs, p_int, g_int }
}

/// Farkas-type infeasibility test on the normalized duals.
fn infeasibility_certificate(ws: &Workspace, u: &[CMatrix], rho: f64) -> bool {
    let y: Vec<CMatrix> = u.iter().map(|m| m.scale_re(-rho)).collect();
    let ynorm = VecOps::norm(&y);
    if ynorm < 1e-6 {
        return false;
    }
    let mut aty = VecOps::zeros_like(&ws.var_sides);
    let mut bdot = 0.0f64;
    for (k, (expr, _)) in ws.cones.iter().enumerate() {
        let yk = y[k].scale_re(1.0 / ynorm);
        expr.adjoint_accumulate(&yk, &mut aty);
        bdot += yk.inner_re(&expr.constant);
    }
    VecOps::norm(&aty) <= 1e-7 && bdot <= -1e-7
}

/// Recession-direction unboundedness test.
fn unboundedness_certificate(ws: &Workspace, dx: &[CMatrix]) -> bool {
    let n = VecOps::norm(dx);
    if n < 1e-6 {
        return false;
    }
    let d: Vec<CMatrix> = dx.iter().map(|m| m.scale_re(1.0 / n)).collect();
    let obj_dir = VecOps::dot(&ws.c_int, &d);
    if obj_dir >= -1e-7 {
        return false;
    }
    for (expr, is_psd) in &ws.cones {
        let image = expr.apply_homogeneous(&d);
        if *is_psd {
            match image.min_eig() {
                Ok(l) if l >= -1e-7 => {}
                _ => return false,
            }
        } else if image.frobenius_norm() > 1e-7 {
            return false;
        }
    }
    true
}

pub fn solve_with_start(
    p: &SdpProblem,
    settings: &SdpSettings,
    warm: Option<&WarmStart>,
) -> Result<SdpSolution, ConicError> {
    let ws = Workspace::new(p);
    let ncones = ws.cones.len();

    let (mut x, mut z, mut u, mut rho) = match warm {
        Some(w)
            if w.x.len() == ws.var_sides.len()
                && w.z.len() == ncones
                && w.x.iter().zip(ws.var_sides.iter()).all(|(m, &s)| m.rows() == s) =>
        {
            (w.x.clone(), w.z.clone(), w.u.clone(), w.rho)
        }
        _ => {
            let x = VecOps::zeros_like(&ws.var_sides);
            let z = ws
                .cones
                .iter()
                .enumerate()
                .map(|(k, (expr, _))| ws.project(k, &expr.constant))
                .collect::<Vec<_>>();
            let u = ws.cones.iter().map(|(e, _)| CMatrix::zeros(e.side, e.side)).collect();
            (x, z, u, settings.rho0)
        }
    };

    let alpha = settings.relax_alpha;
    let max_inner = settings.max_iter.saturating_mul(ROUND);
    let mut rhs = VecOps::zeros_like(&ws.var_sides);
    let mut status = SdpStatus::NumericalTrouble;
    let mut last = None;
    let mut x_at_last_cert = x.clone();
    let mut iterations = 0usize;

    // Anderson acceleration on the splitting state (z, u). The mixed state
    // only seeds the next iteration; residuals, duals, and the returned
    // solution always come from plain projection steps.
    let state_dim: usize = ws.cones.iter().map(|(e, _)| 4 * e.side * e.side).sum();
    let mut aa = Anderson::new(settings.aa_depth, state_dim);
    let mut state_in = gather_state(&z, &u);

    let mut time_cg = 0.0f64;
    let mut time_proj = 0.0f64;
    let mut time_aa = 0.0f64;
    let mut cg_total = 0usize;

    for it in 1..=max_inner {
        iterations = it;
        // x-step: Σ L*L x = Σ L*(z − u − b) − c/ρ
        let t0 = std::time::Instant::now();
        for (r, cv) in rhs.iter_mut().zip(ws.c_int.iter()) {
            *r = cv.scale_re(-1.0 / rho);
        }
        for (k, (expr, _)) in ws.cones.iter().enumerate() {
            let target = &(&z[k] - &u[k]) - &expr.constant;
            expr.adjoint_accumulate(&target, &mut rhs);
        }
        cg_total += ws.cg(&rhs, &mut x);
        time_cg += t0.elapsed().as_secs_f64();

        // z/u-step with over-relaxation (the plain splitting map; z and u
        // now hold exact projection outputs, valid for checks and duals)
        let t0 = std::time::Instant::now();
        for (k, (expr, _)) in ws.cones.iter().enumerate() {
            let mut w = expr.eval(&x);
            // w = α·e + (1−α)·z + u in one pass
            for ((wi, zi), ui) in w
                .data_mut()
                .iter_mut()
                .zip(z[k].data().iter())
                .zip(u[k].data().iter())
            {
                *wi = *wi * alpha + *zi * (1.0 - alpha) + *ui;
            }
            let z_new = ws.project(k, &w);
            for ((ui, wi), zi) in u[k]
                .data_mut()
                .iter_mut()
                .zip(w.data().iter())
                .zip(z_new.data().iter())
            {
                *ui = *wi - *zi;
            }
            z[k] = z_new;
        }
        time_proj += t0.elapsed().as_secs_f64();

        if !x.iter().all(|m| m.is_finite()) || !u.iter().all(|m| m.is_finite()) {
            status = SdpStatus::NumericalTrouble;
            break;
        }

        let mut rho_changed = false;
        if it % CHECK_EVERY == 0 {
            let res = compute_residuals(&ws, &x, &z, &u, rho);
            if trace_enabled() && it % 500 == 0 {
                eprintln!(
                    "    it {it:>6}  rp {:.3e}  rd {:.3e}  gap {:.3e}  rho {:.2e}  p {:+.6e}  g {:+.6e}",
                    res.primal, res.dual, res.gap_rel, rho, res.p_int, res.g_int
                );
            }
            let done = res.primal <= settings.feas_tol
                && res.dual <= settings.feas_tol
                && res.gap_rel <= settings.gap_tol;
            if done {
                status = SdpStatus::Optimal;
                last = Some(res);
                break;
            }
            if it % CERT_EVERY == 0 {
                if infeasibility_certificate(&ws, &u, rho) {
                    status = SdpStatus::Infeasible;
                    last = Some(res);
                    break;
                }
                let dx: Vec<CMatrix> =
                    x.iter().zip(x_at_last_cert.iter()).map(|(a, b)| a - b).collect();
                if unboundedness_certificate(&ws, &dx) {
                    status = SdpStatus::Unbounded;
                    last = Some(res);
                    break;
                }
                x_at_last_cert = x.clone();
            }
            if it % ADAPT_EVERY == 0 {
                let ratio = res.primal / res.dual.max(1e-300);
                if ratio > 10.0 && rho < 1e6 {
                    rho *= 2.0;
                    VecOps::scale(&mut u, 0.5);
                    rho_changed = true;
                } else if ratio < 0.1 && rho > 1e-6 {
                    rho *= 0.5;
                    VecOps::scale(&mut u, 2.0);
                    rho_changed = true;
                }
            }
            last = Some(res);
        }

        // acceleration happens after checks, so breaks above always leave
        // plain projection outputs in (z, u)
        let t0 = std::time::Instant::now();
        if settings.aa_depth > 0 && it % settings.aa_every.max(1) == 0 {
            if rho_changed {
                aa.reset();
                state_in = gather_state(&z, &u);
            } else {
                let plain = gather_state(&z, &u);
                if let Some(mixed) = aa.propose(&state_in, &plain) {
                    state_in = mixed;
                    scatter_state(&state_in, &mut z, &mut u);
                } else {
                    state_in = plain;
                }
            }
        }
        time_aa += t0.elapsed().as_secs_f64();
    }

    if trace_enabled() {
        eprintln!(
            "    [times] cg {time_cg:.2}s ({} its, {:.1}/step)  proj {time_proj:.2}s  aa {time_aa:.2}s  total_iters {iterations}",
            cg_total,
            cg_total as f64 / iterations.max(1) as f64
        );
    }

    // if the loop exhausted its budget right after an accelerated step,
    // restore exact projection outputs with one plain pass
    if settings.aa_depth > 0 && status == SdpStatus::NumericalTrouble {
        for (r, cv) in rhs.iter_mut().zip(ws.c_int.iter()) {
            *r = cv.scale_re(-1.0 / rho);
        }
        for (k, (expr, _)) in ws.cones.iter().enumerate() {
            let target = &(&z[k] - &u[k]) - &expr.constant;
            expr.adjoint_accumulate(&target, &mut rhs);
        }
        ws.cg(&rhs, &mut x);
        for (k, (expr, _)) in ws.cones.iter().enumerate() {
            let e = expr.eval(&x);
            let w = &e + &u[k];
            let z_new = ws.project(k, &w);
            u[k] = &w - &z_new;
            z[k] = z_new;
        }
    }

    let res = last.unwrap_or_else(|| compute_residuals(&ws, &x, &z, &u, rho));

    // user-facing values and duals
    let psd_count = p.psd_constraints().len();
    let mut psd_duals = Vec::with_capacity(psd_count);
    let mut eq_duals = Vec::with_capacity(ncones - psd_count);
    for (k, (_, is_psd)) in ws.cones.iter().enumerate() {
        // duals of the internal minimization: σ·c = Σ L*y with σ = +1 when
        // minimizing and −1 when maximizing; PSD-cone duals are PSD
        let y = u[k].scale_re(-rho);
        if *is_psd {
            psd_duals.push(y);
        } else {
            eq_duals.push(y);
        }
    }
    let objective = p.objective_value(&x);
    let dual_objective = ws.sign * res.g_int + p.objective_offset();

    let audit = audit_solution(p, &x, &psd_duals, &eq_duals);
    let status = match status {
        SdpStatus::Optimal
            if audit.eq_max_residual > 10.0 * settings.feas_tol
                || audit.psd_min_eig < -10.0 * settings.feas_tol =>
        {
            SdpStatus::NumericalTrouble
        }
        s => s,
    };

    Ok(SdpSolution {
        status,
        objective,
        dual_objective,
        variables: x.clone(),
        psd_duals,
        eq_duals,
        gap: res.gap_abs,
        iterations,
        audit,
        warm_start: WarmStart { x, z, u, rho },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::model::{AffineExpr, LinTerm, SdpProblem, Sense};
    use crate::qmat::{bell_vector, CMatrix};

    fn expr(label: &str, side: usize, constant: CMatrix, terms: Vec<LinTerm>) -> AffineExpr {
        AffineExpr { label: label.into(), side, constant, terms }
    }

    #[test]
    fn fixed_variable_maximum_trace() {
        // max tr X s.t. X ⪰ 0, X = diag(1, 2)  →  3
        let mut p = SdpProblem::new(Sense::Maximize);
        let v = p.add_var("x", 2);
        p.objective_term(v, CMatrix::identity(2)).unwrap();
        p.add_psd(expr("x_psd", 2, CMatrix::zeros(2, 2), vec![LinTerm { var: v, ops: vec![] }]))
            .unwrap();
        p.add_eq(expr(
            "fix",
            2,
            CMatrix::diag(&[-1.0, -2.0]),
            vec![LinTerm { var: v, ops: vec![] }],
        ))
        .unwrap();
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-6, "objective {}", sol.objective);
        assert!(sol.audit.eq_max_residual < 1e-7);
    }

    #[test]
    fn bell_fidelity_maximum() {
        // max (1/d²)⟨Φ⁺|X|Φ⁺⟩ s.t. X ⪰ 0, tr X = d  →  1 at the rank-1
        // unnormalized Bell projector (d = 2).
        let d = 2usize;
        let mut p = SdpProblem::new(Sense::Maximize);
        let v = p.add_var("x", d * d);
        let phi = bell_vector(d).unwrap();
        let proj = phi.matmul(&phi.dagger());
        p.objective_term(v, proj.scale_re(1.0 / (d * d) as f64)).unwrap();
        p.add_psd(expr("x_psd", 4, CMatrix::zeros(4, 4), vec![LinTerm { var: v, ops: vec![] }]))
            .unwrap();
        // tr X − d = 0 as a 1×1 expression via conjugation by a row of
        // basis bras stacked: use partial trace over both subsystems
        let dims = crate::qmat::DimSpec::new(&[d, d]).unwrap();
        p.add_eq(expr(
            "trace",
            1,
            CMatrix::diag(&[-(d as f64)]),
            vec![LinTerm {
                var: v,
                ops: vec![crate::conic::LinOp::PartialTrace { dims, traced: vec![0, 1] }],
            }],
        ))
        .unwrap();
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-6, "objective {}", sol.objective);
        assert!((sol.dual_objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_psd_equality() {
        // X ⪰ 0 and X = −1 is infeasible
        let mut p = SdpProblem::new(Sense::Minimize);
        let v = p.add_var("x", 2);
        p.objective_term(v, CMatrix::identity(2)).unwrap();
        p.add_psd(expr("x_psd", 2, CMatrix::zeros(2, 2), vec![LinTerm { var: v, ops: vec![] }]))
            .unwrap();
        p.add_eq(expr(
            "fix",
            2,
            CMatrix::identity(2),
            vec![LinTerm { var: v, ops: vec![] }],
        ))
        .unwrap();
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn unbounded_trace() {
        // max tr X s.t. X ⪰ 0 is unbounded
        let mut p = SdpProblem::new(Sense::Maximize);
        let v = p.add_var("x", 2);
        p.objective_term(v, CMatrix::identity(2)).unwrap();
        p.add_psd(expr("x_psd", 2, CMatrix::zeros(2, 2), vec![LinTerm { var: v, ops: vec![] }]))
            .unwrap();
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Unbounded);
    }

    #[test]
    fn warm_start_reuses_state() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let v = p.add_var("x", 2);
        p.objective_term(v, CMatrix::identity(2)).unwrap();
        p.add_psd(expr("x_psd", 2, CMatrix::zeros(2, 2), vec![LinTerm { var: v, ops: vec![] }]))
            .unwrap();
        p.add_eq(expr(
            "fix",
            2,
            CMatrix::diag(&[-1.0, -2.0]),
            vec![LinTerm { var: v, ops: vec![] }],
        ))
        .unwrap();
        let first = solve(&p, &SdpSettings::default()).unwrap();
        let again = solve_with_start(&p, &SdpSettings::default(), Some(&first.warm_start)).unwrap();
        assert_eq!(again.status, SdpStatus::Optimal);
        assert!(again.iterations <= first.iterations);
    }
}
