//! Conic problem data: Hermitian variables, affine expressions, objective.

use super::params::{herm_to_params, param_len};
use super::ConicError;
use crate::qmat::{
    partial_trace, partial_transpose, permute_subsystems, kron, CMatrix, DimSpec,
};
use std::fmt::Write as _;

/// Handle to a declared matrix variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// One real-linear primitive on Hermitian matrices. Each maps Hermitian to
/// Hermitian and has an explicit adjoint for the Hilbert–Schmidt inner
/// product.
#[derive(Debug, Clone)]
pub enum LinOp {
    /// c·X with real c.
    Scale(f64),
    /// A X A† with a possibly rectangular A.
    Conjugate(CMatrix),
    /// X ↦ X ⊗ 1_k.
    TensorIdRight(usize),
    /// X ↦ 1_k ⊗ X.
    TensorIdLeft(usize),
    /// Trace over the listed subsystems of `dims`.
    PartialTrace { dims: DimSpec, traced: Vec<usize> },
    /// Transpose the listed subsystems of `dims`.
    PartialTranspose { dims: DimSpec, set: Vec<usize> },
    /// Relabel subsystems (output slot k carries input subsystem perm[k]).
    Permute { dims: DimSpec, perm: Vec<usize> },
}

impl LinOp {
    fn output_side(&self, input: usize) -> Result<usize, ConicError> {
        let out = match self {
            LinOp::Scale(_) => input,
            LinOp::Conjugate(a) => {
                if a.cols() != input {
                    return Err(ConicError::ShapeMismatch(format!(
                        "conjugation by {}x{} applied to side {input}",
                        a.rows(),
                        a.cols()
                    )));
                }
                a.rows()
            }
            LinOp::TensorIdRight(k) | LinOp::TensorIdLeft(k) => input * k,
            LinOp::PartialTrace { dims, traced } => {
                dims.check_side(input)?;
                let traced_total: usize = traced.iter().map(|&s| dims.dim(s)).product();
                input / traced_total
            }
            LinOp::PartialTranspose { dims, .. } | LinOp::Permute { dims, .. } => {
                dims.check_side(input)?;
                input
            }
        };
        Ok(out)
    }

    fn apply(&self, x: &CMatrix) -> CMatrix {
        match self {
            LinOp::Scale(c) => x.scale_re(*c),
            LinOp::Conjugate(a) => x.conjugate_by(a),
            LinOp::TensorIdRight(k) => kron(x, &CMatrix::identity(*k)),
            LinOp::TensorIdLeft(k) => kron(&CMatrix::identity(*k), x),
            LinOp::PartialTrace { dims, traced } => {
                partial_trace(x, dims, traced).expect("validated dims")
            }
            LinOp::PartialTranspose { dims, set } => {
                partial_transpose(x, dims, set).expect("validated dims")
            }
            LinOp::Permute { dims, perm } => {
                permute_subsystems(x, dims, perm).expect("validated permutation")
            }
        }
    }

    /// Adjoint action: ⟨apply(X), Y⟩ = ⟨X, adjoint_apply(Y)⟩.
    fn adjoint_apply(&self, y: &CMatrix) -> CMatrix {
        match self {
            LinOp::Scale(c) => y.scale_re(*c),
            LinOp::Conjugate(a) => y.conjugate_by(&a.dagger()),
            LinOp::TensorIdRight(k) => {
                let dims = DimSpec::new(&[y.rows() / k, *k]).expect("positive dims");
                partial_trace(y, &dims, &[1]).expect("validated dims")
            }
            LinOp::TensorIdLeft(k) => {
                let dims = DimSpec::new(&[*k, y.rows() / k]).expect("positive dims");
                partial_trace(y, &dims, &[0]).expect("validated dims")
            }
            LinOp::PartialTrace { dims, traced } => insert_identity(y, dims, traced),
            LinOp::PartialTranspose { dims, set } => {
                partial_transpose(y, dims, set).expect("validated dims")
            }
            LinOp::Permute { dims, perm } => {
                let mut inverse = vec![0usize; perm.len()];
                for (k, &p) in perm.iter().enumerate() {
                    inverse[p] = k;
                }
                let out_dims: Vec<usize> = perm.iter().map(|&p| dims.dim(p)).collect();
                permute_subsystems(
                    y,
                    &DimSpec::new(&out_dims).expect("positive dims"),
                    &inverse,
                )
                .expect("validated permutation")
            }
        }
    }
}

/// Adjoint of a partial trace over `traced`: tensor the identity back into
/// the traced slots. ⟨Tr_S X, Y⟩ = ⟨X, Y ⊗_S 1⟩.
fn insert_identity(y: &CMatrix, dims: &DimSpec, traced: &[usize]) -> CMatrix {
    let mut set = traced.to_vec();
    set.sort_unstable();
    set.dedup();
    // Y ⊗ 1 with Y on the kept slots (in order), then permute back.
    let traced_total: usize = set.iter().map(|&s| dims.dim(s)).product();
    let big = kron(y, &CMatrix::identity(traced_total));
    // big lives on kept..., traced...; build the permutation sending that
    // ordering to the original one.
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !set.contains(k)).collect();
    let mut shuffled: Vec<usize> = kept.clone();
    shuffled.extend(set.iter().copied());
    // output slot k of the final operator must carry original subsystem k,
    // which sits at position shuffled.index_of(k) in `big`.
    let mut perm = vec![0usize; dims.len()];
    for k in 0..dims.len() {
        perm[k] = shuffled.iter().position(|&s| s == k).expect("complete cover");
    }
    let big_dims: Vec<usize> = shuffled.iter().map(|&s| dims.dim(s)).collect();
    permute_subsystems(&big, &DimSpec::new(&big_dims).expect("positive dims"), &perm)
        .expect("validated permutation")
}

/// A single `ops`-chain applied to one variable, left to right.
#[derive(Debug, Clone)]
pub struct LinTerm {
    pub var: VarRef,
    pub ops: Vec<LinOp>,
}

impl LinTerm {
    fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut cur = x.clone();
        for op in &self.ops {
            cur = op.apply(&cur);
        }
        cur
    }

    fn adjoint_apply(&self, y: &CMatrix) -> CMatrix {
        let mut cur = y.clone();
        for op in self.ops.iter().rev() {
            cur = op.adjoint_apply(&cur);
        }
        cur
    }
}

/// Affine Hermitian-matrix expression: constant + Σ term(X_var).
#[derive(Debug, Clone)]
pub struct AffineExpr {
    pub label: String,
    pub side: usize,
    pub constant: CMatrix,
    pub terms: Vec<LinTerm>,
}

impl AffineExpr {
    pub fn eval(&self, vars: &[CMatrix]) -> CMatrix {
        let mut out = self.constant.clone();
        for t in &self.terms {
            out += &t.apply(&vars[t.var.0]);
        }
        out
    }

    /// Accumulate the adjoint of the homogeneous part: out[v] += L_v*(y).
    pub(crate) fn adjoint_accumulate(&self, y: &CMatrix, out: &mut [CMatrix]) {
        for t in &self.terms {
            out[t.var.0] += &t.adjoint_apply(y);
        }
    }

    /// Homogeneous (constant-free) forward action.
    pub(crate) fn apply_homogeneous(&self, vars: &[CMatrix]) -> CMatrix {
        let mut out = CMatrix::zeros(self.side, self.side);
        for t in &self.terms {
            out += &t.apply(&vars[t.var.0]);
        }
        out
    }
}

struct VarDecl {
    name: String,
    side: usize,
}

/// Conic problem over Hermitian matrix variables:
/// optimize a real-linear objective subject to affine PSD and equality
/// constraints.
pub struct SdpProblem {
    vars: Vec<VarDecl>,
    sense: Sense,
    objective_terms: Vec<(VarRef, CMatrix)>,
    objective_constant: f64,
    psd: Vec<AffineExpr>,
    eq: Vec<AffineExpr>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            vars: Vec::new(),
            sense,
            objective_terms: Vec::new(),
            objective_constant: 0.0,
            psd: Vec::new(),
            eq: Vec::new(),
        }
    }

    /// Declare a Hermitian matrix variable of the given side length.
    pub fn add_var(&mut self, name: impl Into<String>, side: usize) -> VarRef {
        self.vars.push(VarDecl { name: name.into(), side });
        VarRef(self.vars.len() - 1)
    }

    pub fn var_side(&self, v: VarRef) -> usize {
        self.vars[v.0].side
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_name(&self, v: VarRef) -> &str {
        &self.vars[v.0].name
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Add Re⟨coeff, X_v⟩ to the objective.
    pub fn objective_term(&mut self, v: VarRef, coeff: CMatrix) -> Result<(), ConicError> {
        if coeff.rows() != self.vars[v.0].side || !coeff.is_square() {
            return Err(ConicError::ShapeMismatch("objective coefficient".into()));
        }
        self.objective_terms.push((v, coeff));
        Ok(())
    }

    pub fn objective_constant(&mut self, c: f64) {
        self.objective_constant += c;
    }

    fn validate_expr(&self, expr: &AffineExpr) -> Result<(), ConicError> {
        if !expr.constant.is_square() || expr.constant.rows() != expr.side {
            return Err(ConicError::ShapeMismatch(format!(
                "constant of '{}' has side {} (expected {})",
                expr.label,
                expr.constant.rows(),
                expr.side
            )));
        }
        let herm = expr.constant.hermiticity_residual();
        if herm > 1e-10 {
            return Err(ConicError::NonHermitianConstant {
                label: expr.label.clone(),
                residual: herm,
            });
        }
        for t in &expr.terms {
            let Some(decl) = self.vars.get(t.var.0) else {
                return Err(ConicError::UnknownVariable);
            };
            let mut side = decl.side;
            for op in &t.ops {
                side = op.output_side(side)?;
                if let LinOp::Conjugate(a) = op {
                    if a.rows() == a.cols() {
                        // square conjugations must not break Hermiticity
                        // preserving structure; nothing to check, A X A† is
                        // always Hermitian for Hermitian X
                        let _ = a;
                    }
                }
            }
            if side != expr.side {
                return Err(ConicError::ShapeMismatch(format!(
                    "term on '{}' in '{}' produces side {side}, expected {}",
                    decl.name, expr.label, expr.side
                )));
            }
        }
        Ok(())
    }

    /// Require `expr ⪰ 0`.
    pub fn add_psd(&mut self, expr: AffineExpr) -> Result<(), ConicError> {
        self.validate_expr(&expr)?;
        self.psd.push(expr);
        Ok(())
    }

    /// Require `expr = 0`.
    pub fn add_eq(&mut self, expr: AffineExpr) -> Result<(), ConicError> {
        self.validate_expr(&expr)?;
        self.eq.push(expr);
        Ok(())
    }

    pub fn psd_constraints(&self) -> &[AffineExpr] {
        &self.psd
    }

    pub fn eq_constraints(&self) -> &[AffineExpr] {
        &self.eq
    }

    pub fn var_sides(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.side).collect()
    }

    /// User-facing objective value at the given variable assignment.
    pub fn objective_value(&self, vars: &[CMatrix]) -> f64 {
        let mut v = self.objective_constant;
        for (var, coeff) in &self.objective_terms {
            v += coeff.inner_re(&vars[var.0]);
        }
        v
    }

    pub(crate) fn objective_terms(&self) -> &[(VarRef, CMatrix)] {
        &self.objective_terms
    }

    pub(crate) fn objective_offset(&self) -> f64 {
        self.objective_constant
    }

    /// Total number of real parameters over all variables.
    pub fn total_params(&self) -> usize {
        self.vars.iter().map(|v| param_len(v.side)).sum()
    }
}

/// Text dump of the problem as sparse triplets in the Hermitian real
/// coordinates of [`super::params`], for cross-solver comparison. Row
/// indices address the constraint's coordinates, column indices the
/// variable's. Intended for small problems: the maps are materialized by
/// applying each term to every basis element.
pub fn dump_problem(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sdp-debug v1");
    for v in &p.vars {
        let _ = writeln!(out, "var {} side {}", v.name, v.side);
    }
    let sense = match p.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let _ = writeln!(out, "objective {} constant {:.12e}", sense, p.objective_constant);
    for (var, coeff) in &p.objective_terms {
        for (k, c) in herm_to_params(coeff).iter().enumerate() {
            if *c != 0.0 {
                let _ = writeln!(out, "obj {} {} {:.12e}", p.vars[var.0].name, k, c);
            }
        }
    }
    for (kind, exprs) in [("psd", &p.psd), ("eq", &p.eq)] {
        for (ci, expr) in exprs.iter().enumerate() {
            let _ = writeln!(out, "{kind} {ci} side {} label {}", expr.side, expr.label);
            for (k, c) in herm_to_params(&expr.constant).iter().enumerate() {
                if c.abs() > 0.0 {
                    let _ = writeln!(out, "  const {k} {c:.12e}");
                }
            }
            for term in &expr.terms {
                let side = p.vars[term.var.0].side;
                let nparams = param_len(side);
                for col in 0..nparams {
                    let mut basis = vec![0.0; nparams];
                    basis[col] = 1.0;
                    let image = term.apply(&super::params::params_to_herm(side, &basis));
                    for (row, val) in herm_to_params(&image).iter().enumerate() {
                        if val.abs() > 1e-15 {
                            let _ = writeln!(
                                out,
                                "  term {} {row} {col} {val:.12e}",
                                p.vars[term.var.0].name
                            );
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::test_support::rand_hermitian;

    #[test]
    fn linop_adjoints_match_inner_products() {
        let dims = DimSpec::new(&[2, 3]).unwrap();
        let ops = vec![
            LinOp::Scale(1.7),
            LinOp::TensorIdRight(2),
            LinOp::TensorIdLeft(3),
            LinOp::PartialTrace { dims: dims.clone(), traced: vec![0] },
            LinOp::PartialTranspose { dims: dims.clone(), set: vec![1] },
            LinOp::Permute { dims: dims.clone(), perm: vec![1, 0] },
            LinOp::Conjugate(crate::qmat::test_support::rand_matrix(4, 6, 99)),
        ];
        for (i, op) in ops.iter().enumerate() {
            let x = rand_hermitian(6, 100 + i as u64);
            let out_side = op.output_side(6).unwrap();
            let y = rand_hermitian(out_side, 200 + i as u64);
            let lhs = op.apply(&x).inner_re(&y);
            let rhs = x.inner_re(&op.adjoint_apply(&y));
            assert!((lhs - rhs).abs() < 1e-10, "op {i}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn insert_identity_is_partial_trace_adjoint() {
        let dims = DimSpec::new(&[2, 3, 2]).unwrap();
        let x = rand_hermitian(12, 7);
        let y = rand_hermitian(4, 8); // kept slots 0 and 2
        let traced = vec![1usize];
        let lhs = partial_trace(&x, &dims, &traced).unwrap();
        // careful: kept slots are (0, 2), so lhs is 4x4
        let lhs_ip = lhs.inner_re(&y);
        let rhs_ip = x.inner_re(&insert_identity(&y, &dims, &traced));
        assert!((lhs_ip - rhs_ip).abs() < 1e-11);
    }

    #[test]
    fn expression_validation_rejects_shape_errors() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let v = p.add_var("x", 3);
        let bad = AffineExpr {
            label: "bad".into(),
            side: 4,
            constant: CMatrix::zeros(4, 4),
            terms: vec![LinTerm { var: v, ops: vec![] }],
        };
        assert!(p.add_psd(bad).is_err());
        let skew = CMatrix::from_pairs(
            1,
            1,
            &[(0.0, 1.0)],
        );
        let bad_const = AffineExpr {
            label: "skew".into(),
            side: 1,
            constant: skew,
            terms: vec![],
        };
        assert!(p.add_eq(bad_const).is_err());
    }

    #[test]
    fn dump_contains_triplets() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let v = p.add_var("x", 2);
        p.objective_term(v, CMatrix::identity(2)).unwrap();
        p.add_psd(AffineExpr {
            label: "x_psd".into(),
            side: 2,
            constant: CMatrix::zeros(2, 2),
            terms: vec![LinTerm { var: v, ops: vec![] }],
        })
        .unwrap();
        let text = dump_problem(&p);
        assert!(text.contains("var x side 2"));
        assert!(text.contains("psd 0 side 2"));
        assert!(text.contains("term x 0 0"));
    }
}
