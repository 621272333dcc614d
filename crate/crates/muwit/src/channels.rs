//! Kraus/Choi channel representations and the unital-channel zoo.
//!
//! Choi matrices follow the unnormalized convention E = (1⊗𝓔)|Φ⁺⟩⟨Φ⁺| with
//! |Φ⁺⟩ = Σ_k |k⟩⊗|k⟩, so tr E = d. Subsystem 0 of a Choi matrix is the
//! input copy and subsystem 1 the channel output.

use crate::qmat::{partial_trace, CMatrix, DimSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when validating channels at construction.
pub const CONSTRUCT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("a channel needs at least one Kraus operator")]
    EmptyKraus,
    #[error("Kraus operators must be square matrices of equal dimension")]
    KrausShapeMismatch,
    #[error("not trace preserving: max |ΣK†K − 1| = {residual:.3e}")]
    NotTracePreserving { residual: f64 },
    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("HMR parameters must satisfy |α|²+|β|² = 1, got {0}")]
    HmrConstraint(f64),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("channels must share the same dimension")]
    DimensionMismatch,
    #[error("invalid mixed-unitary decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("JSON error: {0}")]
    Json(String),
}

/// Max-entry residual of Σ K†K − 1 (trace preservation).
pub fn cpt_residual(kraus: &[CMatrix]) -> f64 {
    let d = kraus[0].rows();
    let mut sum = CMatrix::zeros(d, d);
    for k in kraus {
        sum += &k.dagger().matmul(k);
    }
    (&sum - &CMatrix::identity(d)).max_abs()
}

/// Max-entry residual of Σ K K† − 1 (unitality).
pub fn unitality_residual(kraus: &[CMatrix]) -> f64 {
    let d = kraus[0].rows();
    let mut sum = CMatrix::zeros(d, d);
    for k in kraus {
        sum += &k.matmul(&k.dagger());
    }
    (&sum - &CMatrix::identity(d)).max_abs()
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    d: usize,
    kraus: Vec<CMatrix>,
}

impl Channel {
    /// Build a channel, checking trace preservation.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self, ChannelError> {
        if kraus.is_empty() {
            return Err(ChannelError::EmptyKraus);
        }
        let d = kraus[0].rows();
        if d == 0 || kraus.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(ChannelError::KrausShapeMismatch);
        }
        let residual = cpt_residual(&kraus);
        if residual > CONSTRUCT_TOL {
            return Err(ChannelError::NotTracePreserving { residual });
        }
        Ok(Self { d, kraus })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Max-entry residual of Σ K†K − 1.
    pub fn verify_cpt(&self) -> f64 {
        cpt_residual(&self.kraus)
    }

    /// Max-entry residual of Σ K K† − 1.
    pub fn verify_unital(&self) -> f64 {
        unitality_residual(&self.kraus)
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.verify_unital() <= tol
    }

    /// Apply the channel: Σ K ρ K†.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for k in &self.kraus {
            out += &rho.conjugate_by(k);
        }
        out
    }
}

/// Unnormalized Choi matrix of a channel; Hermitian, PSD, trace d.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    d: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    /// Wrap a d²×d² matrix as a Choi matrix. Shape is checked; physical
    /// validity is the caller's business (see the residual methods).
    pub fn from_matrix(d: usize, matrix: CMatrix) -> Result<Self, ChannelError> {
        if matrix.rows() != d * d || matrix.cols() != d * d {
            return Err(ChannelError::InvalidDimension(format!(
                "Choi matrix of a dimension-{d} channel must be {0}x{0}",
                d * d
            )));
        }
        Ok(Self { d, matrix })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn dims(&self) -> DimSpec {
        DimSpec::new(&[self.d, self.d]).expect("positive dims")
    }

    /// Max-entry residual of Tr_out E − 1 (trace preservation of the map).
    pub fn cpt_residual(&self) -> f64 {
        let reduced = partial_trace(&self.matrix, &self.dims(), &[1]).expect("choi dims");
        (&reduced - &CMatrix::identity(self.d)).max_abs()
    }

    /// Max-entry residual of Tr_in E − 1 (unitality of the map).
    pub fn unitality_residual(&self) -> f64 {
        let reduced = partial_trace(&self.matrix, &self.dims(), &[0]).expect("choi dims");
        (&reduced - &CMatrix::identity(self.d)).max_abs()
    }
}

/// Choi matrix E = Σ_i (1⊗K_i)|Φ⁺⟩⟨Φ⁺|(1⊗K_i)†.
pub fn to_choi(ch: &Channel) -> ChoiMatrix {
    let d = ch.d;
    let mut e = CMatrix::zeros(d * d, d * d);
    for k in &ch.kraus {
        // (1⊗K)|Φ⁺⟩ has components [(j,a)] = K[a,j]
        let mut v = CMatrix::zeros(d * d, 1);
        for j in 0..d {
            for a in 0..d {
                v[(j * d + a, 0)] = k[(a, j)];
            }
        }
        e += &v.matmul(&v.dagger());
    }
    ChoiMatrix { d, matrix: e }
}

/// A mixed-unitary decomposition {p_i, U_i}.
#[derive(Debug, Clone)]
pub struct MuDecomposition {
    d: usize,
    unitaries: Vec<CMatrix>,
    probs: Vec<f64>,
}

impl MuDecomposition {
    pub fn new(unitaries: Vec<CMatrix>, probs: Vec<f64>) -> Result<Self, ChannelError> {
        if unitaries.is_empty() || unitaries.len() != probs.len() {
            return Err(ChannelError::InvalidDecomposition(
                "need equally many unitaries and probabilities, at least one".into(),
            ));
        }
        let d = unitaries[0].rows();
        for u in &unitaries {
            if u.rows() != d || u.cols() != d {
                return Err(ChannelError::KrausShapeMismatch);
            }
            let r = unitarity_residual(u);
            if r > CONSTRUCT_TOL {
                return Err(ChannelError::NotUnitary { residual: r });
            }
        }
        validate_probs(&probs, 1e-12)?;
        Ok(Self { d, unitaries, probs })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The channel Σ p_i U_i ρ U_i†, with Kraus operators √p_i U_i.
    pub fn to_channel(&self) -> Channel {
        let kraus = self
            .unitaries
            .iter()
            .zip(self.probs.iter())
            .map(|(u, &p)| u.scale_re(p.sqrt()))
            .collect();
        Channel { d: self.d, kraus }
    }
}

fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (&u.dagger().matmul(u) - &CMatrix::identity(u.rows())).max_abs()
}

fn validate_probs(probs: &[f64], tol: f64) -> Result<(), ChannelError> {
    if probs.iter().any(|&p| !(-tol..=1.0 + tol).contains(&p)) {
        return Err(ChannelError::InvalidProbabilities(format!("{probs:?}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(ChannelError::InvalidProbabilities(format!(
            "sum {sum} differs from 1"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// zoo

/// The identity channel on dimension d.
pub fn identity_channel(d: usize) -> Result<Channel, ChannelError> {
    if d < 1 {
        return Err(ChannelError::InvalidDimension("d must be ≥ 1".into()));
    }
    Ok(Channel { d, kraus: vec![CMatrix::identity(d)] })
}

/// The d² Weyl (shift/clock) unitaries Y^a Z^b, a,b < d.
pub fn weyl_unitaries(d: usize) -> Result<Vec<CMatrix>, ChannelError> {
    if d < 1 {
        return Err(ChannelError::InvalidDimension("d must be ≥ 1".into()));
    }
    let mut shift = CMatrix::zeros(d, d); // Y = Σ_j |j⟩⟨j+1 mod d|
    for j in 0..d {
        shift[(j, (j + 1) % d)] = C64::new(1.0, 0.0);
    }
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let clock = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, omega * r as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut us = Vec::with_capacity(d * d);
    let mut ya = CMatrix::identity(d);
    for _ in 0..d {
        let mut yazb = ya.clone();
        for _ in 0..d {
            us.push(yazb.clone());
            yazb = yazb.matmul(&clock);
        }
        ya = ya.matmul(&shift);
    }
    Ok(us)
}

/// Fully depolarizing channel ρ ↦ tr(ρ)·1/d, realized as the uniform
/// mixture of the d² Weyl unitaries so that the Kraus form doubles as an
/// MU certificate.
pub fn depolarizing(d: usize) -> Result<Channel, ChannelError> {
    let us = weyl_unitaries(d)?;
    let scale = 1.0 / d as f64;
    let kraus = us.into_iter().map(|u| u.scale_re(scale)).collect();
    Channel::new(kraus)
}

/// The Landau–Streater qutrit channel: three antisymmetric Kraus operators
/// scaled by 1/√2 so that Σ K†K = 1.
pub fn landau_streater() -> Channel {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k1 = CMatrix::zeros(3, 3);
    k1[(1, 2)] = C64::new(s, 0.0);
    k1[(2, 1)] = C64::new(-s, 0.0);
    let mut k2 = CMatrix::zeros(3, 3);
    k2[(0, 2)] = C64::new(s, 0.0);
    k2[(2, 0)] = C64::new(-s, 0.0);
    let mut k3 = CMatrix::zeros(3, 3);
    k3[(0, 1)] = C64::new(s, 0.0);
    k3[(1, 0)] = C64::new(-s, 0.0);
    Channel::new(vec![k1, k2, k3]).expect("Landau-Streater is CPT")
}

/// The Arveson–Ohno qutrit channel: four Kraus operators scaled by 1/2.
pub fn arveson_ohno() -> Channel {
    let r2 = std::f64::consts::SQRT_2;
    let r3 = 3f64.sqrt();
    let e = |r: usize, c: usize, v: f64| {
        let mut m = CMatrix::zeros(3, 3);
        m[(r, c)] = C64::new(v, 0.0);
        m
    };
    let k1 = e(0, 0, 1.0);
    let k2 = &e(0, 1, 1.0) + &e(1, 2, r2);
    let k3 = &e(1, 0, r2) + &e(2, 1, r3);
    let k4 = &e(2, 0, 1.0) + &e(0, 2, r2);
    let kraus = [k1, k2, k3, k4].iter().map(|k| k.scale_re(0.5)).collect();
    Channel::new(kraus).expect("Arveson-Ohno is CPT")
}

/// A channel of the Haagerup–Musat–Ruskai family; requires
/// |α|² + |β|² = 1. Kraus operators scaled by 1/√2.
pub fn hmr(alpha: C64, beta: C64) -> Result<Channel, ChannelError> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(ChannelError::HmrConstraint(norm));
    }
    let one = C64::new(1.0, 0.0);
    let mut k1 = CMatrix::zeros(3, 3);
    k1[(0, 0)] = alpha;
    k1[(1, 2)] = one;
    let mut k2 = CMatrix::zeros(3, 3);
    k2[(0, 2)] = beta;
    k2[(2, 1)] = one;
    let mut k3 = CMatrix::zeros(3, 3);
    k3[(0, 1)] = -one;
    k3[(2, 0)] = -beta.conj();
    let mut k4 = CMatrix::zeros(3, 3);
    k4[(1, 0)] = one;
    k4[(2, 2)] = alpha.conj();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kraus = [k1, k2, k3, k4].iter().map(|k| k.scale_re(s)).collect();
    Channel::new(kraus)
}

/// The benchmark point α = 1/√5, β = 2/√5 of the HMR family.
pub fn hmr_benchmark() -> Channel {
    let s5 = 5f64.sqrt();
    hmr(C64::new(1.0 / s5, 0.0), C64::new(2.0 / s5, 0.0)).expect("valid parameters")
}

/// Convex mixture Σ p_j 𝓔_j, as the union of √p_j-scaled Kraus sets.
pub fn mix(channels: &[Channel], probs: &[f64]) -> Result<Channel, ChannelError> {
    if channels.is_empty() || channels.len() != probs.len() {
        return Err(ChannelError::InvalidProbabilities(
            "need equally many channels and weights".into(),
        ));
    }
    validate_probs(probs, 1e-12)?;
    let d = channels[0].d;
    if channels.iter().any(|c| c.d != d) {
        return Err(ChannelError::DimensionMismatch);
    }
    let mut kraus = Vec::new();
    for (ch, &p) in channels.iter().zip(probs.iter()) {
        if p <= 0.0 {
            continue;
        }
        let s = p.sqrt();
        kraus.extend(ch.kraus.iter().map(|k| k.scale_re(s)));
    }
    Channel::new(kraus)
}

/// Two-channel mixture p·𝓔_a + (1−p)·𝓔_b.
pub fn mix_pair(a: &Channel, b: &Channel, p: f64) -> Result<Channel, ChannelError> {
    mix(&[a.clone(), b.clone()], &[p, 1.0 - p])
}

/// The composition 𝓔 ∘ U, with Kraus set {K_i U}.
pub fn compose_unitary(ch: &Channel, u: &CMatrix) -> Result<Channel, ChannelError> {
    let r = unitarity_residual(u);
    if r > CONSTRUCT_TOL || u.rows() != ch.d {
        return Err(ChannelError::NotUnitary { residual: r });
    }
    let kraus = ch.kraus.iter().map(|k| k.matmul(u)).collect();
    Ok(Channel { d: ch.d, kraus })
}

// ---------------------------------------------------------------------------
// random sampling

/// Haar-distributed d×d unitary: orthonormalization of a complex Gaussian
/// matrix with the triangular factor's diagonal kept positive.
pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(&mut rng, d)
}

fn random_unitary_with(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        )
    });
    // modified Gram-Schmidt on columns, two passes for orthogonality
    let mut cols: Vec<Vec<C64>> =
        (0..d).map(|j| (0..d).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: C64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for i in 0..d {
                    let s = cols[k][i];
                    cols[j][i] -= proj * s;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Seeded random mixed-unitary channel with k Haar unitaries and uniform
/// Dirichlet weights.
pub fn random_mu_channel(
    d: usize,
    k: usize,
    seed: u64,
) -> Result<(Channel, MuDecomposition), ChannelError> {
    if k < 1 {
        return Err(ChannelError::InvalidDecomposition("k must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unitaries: Vec<CMatrix> = (0..k).map(|_| random_unitary_with(&mut rng, d)).collect();
    // exponential spacings normalize to a flat Dirichlet sample
    let raw: Vec<f64> = (0..k).map(|_| -rng.random_range(1e-12..1.0f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let dec = MuDecomposition::new(unitaries, probs)?;
    let ch = dec.to_channel();
    Ok((ch, dec))
}

// ---------------------------------------------------------------------------
// JSON schemas

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    d: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize)]
struct MuDecompositionJson {
    d: usize,
    probs: Vec<f64>,
    unitaries: Vec<Vec<Vec<[f64; 2]>>>,
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m[(r, c)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

fn rows_to_matrix(d: usize, rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, ChannelError> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(ChannelError::Json(format!("expected {d}x{d} entry grid")));
    }
    Ok(CMatrix::from_fn(d, d, |r, c| {
        C64::new(rows[r][c][0], rows[r][c][1])
    }))
}

impl Channel {
    pub fn to_json(&self) -> String {
        let doc = ChannelJson {
            d: self.d,
            kraus: self.kraus.iter().map(matrix_to_rows).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ChannelError> {
        let doc: ChannelJson =
            serde_json::from_str(text).map_err(|e| ChannelError::Json(e.to_string()))?;
        let kraus = doc
            .kraus
            .iter()
            .map(|rows| rows_to_matrix(doc.d, rows))
            .collect::<Result<Vec<_>, _>>()?;
        Channel::new(kraus)
    }
}

impl MuDecomposition {
    pub fn to_json(&self) -> String {
        let doc = MuDecompositionJson {
            d: self.d,
            probs: self.probs.clone(),
            unitaries: self.unitaries.iter().map(matrix_to_rows).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ChannelError> {
        let doc: MuDecompositionJson =
            serde_json::from_str(text).map_err(|e| ChannelError::Json(e.to_string()))?;
        let unitaries = doc
            .unitaries
            .iter()
            .map(|rows| rows_to_matrix(doc.d, rows))
            .collect::<Result<Vec<_>, _>>()?;
        MuDecomposition::new(unitaries, doc.probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::test_support::rand_hermitian;
    use crate::qmat::{bell_vector, kron};

    #[test]
    fn choi_of_identity_is_bell_projector() {
        let ch = identity_channel(2).unwrap();
        let e = to_choi(&ch);
        let phi = bell_vector(2).unwrap();
        let proj = phi.matmul(&phi.dagger());
        assert!((&e.matrix - &proj).max_abs() < 1e-15);
        assert!((e.matrix.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn choi_of_depolarizing_matches_summation_oracle() {
        let ch = depolarizing(3).unwrap();
        let e = to_choi(&ch);
        // oracle: 𝓔_D[|k⟩⟨l|] = δ_kl 1/3, assembled entry by entry
        let mut oracle = CMatrix::zeros(9, 9);
        for k in 0..3 {
            for a in 0..3 {
                oracle[(k * 3 + a, k * 3 + a)] = C64::new(1.0 / 3.0, 0.0);
            }
        }
        assert!((&e.matrix - &oracle).max_abs() < 1e-13);
        assert!((e.matrix.trace().re - 3.0).abs() < 1e-13);
    }

    #[test]
    fn choi_of_unitary_channel_is_rank_one() {
        let u = random_unitary(3, 5);
        let ch = Channel::new(vec![u]).unwrap();
        let e = to_choi(&ch);
        let eigs = e.matrix.eigh().unwrap().values;
        for &l in &eigs[..8] {
            assert!(l.abs() < 1e-12);
        }
        assert!((eigs[8] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_identity_and_raw_sets() {
        let ch = identity_channel(4).unwrap();
        assert_eq!(ch.verify_cpt(), 0.0);
        assert_eq!(ch.verify_unital(), 0.0);
        // non-normalized Kraus set {1, 1}: ΣK†K = 2·1, residual 1
        let raw = vec![CMatrix::identity(2), CMatrix::identity(2)];
        assert!((cpt_residual(&raw) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zoo_channels_are_cpt_and_unital() {
        for (name, ch) in [
            ("ls", landau_streater()),
            ("ao", arveson_ohno()),
            ("hmr", hmr_benchmark()),
            ("dep", depolarizing(3).unwrap()),
        ] {
            assert!(ch.verify_cpt() <= 1e-14, "{name} cpt");
            assert!(ch.verify_unital() <= 1e-14, "{name} unital");
        }
    }

    #[test]
    fn depolarizing_maps_to_maximally_mixed() {
        let ch = depolarizing(3).unwrap();
        assert_eq!(ch.kraus().len(), 9);
        let rho = rand_hermitian(3, 17);
        let out = ch.apply(&rho);
        let expect = CMatrix::identity(3).scale(rho.trace() / C64::new(3.0, 0.0));
        assert!((&out - &expect).max_abs() < 1e-12);
        assert!(depolarizing(2).unwrap().kraus().len() == 4);
    }

    #[test]
    fn landau_streater_facts() {
        let ch = landau_streater();
        assert_eq!(ch.kraus().len(), 3);
        let mixed = CMatrix::identity(3).scale_re(1.0 / 3.0);
        assert!((&ch.apply(&mixed) - &mixed).max_abs() < 1e-15);
    }

    #[test]
    fn arveson_ohno_facts() {
        let ch = arveson_ohno();
        assert_eq!(ch.kraus().len(), 4);
        assert!((to_choi(&ch).matrix.trace().re - 3.0).abs() < 1e-13);
    }

    #[test]
    fn hmr_parameter_validation() {
        assert!(hmr(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).is_ok());
        assert!(matches!(
            hmr(C64::new(1.0, 0.0), C64::new(0.5, 0.0)),
            Err(ChannelError::HmrConstraint(_))
        ));
    }

    #[test]
    fn mix_singleton_and_linearity() {
        let ls = landau_streater();
        let same = mix(&[ls.clone()], &[1.0]).unwrap();
        assert!((&to_choi(&same).matrix - &to_choi(&ls).matrix).max_abs() < 1e-14);

        let id = identity_channel(3).unwrap();
        let p = 0.37;
        let m = mix_pair(&id, &ls, p).unwrap();
        let expect = &to_choi(&id).matrix.scale_re(p) + &to_choi(&ls).matrix.scale_re(1.0 - p);
        assert!((&to_choi(&m).matrix - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn rotated_ls_mixture_reproduces_depolarizing() {
        // (1/9) Σ_i LS∘V_i over the nine Weyl unitaries
        let ls = landau_streater();
        let rotated: Vec<Channel> = weyl_unitaries(3)
            .unwrap()
            .iter()
            .map(|u| compose_unitary(&ls, u).unwrap())
            .collect();
        let weights = vec![1.0 / 9.0; 9];
        let mixture = mix(&rotated, &weights).unwrap();
        let dep = depolarizing(3).unwrap();
        let diff = (&to_choi(&mixture).matrix - &to_choi(&dep).matrix).max_abs();
        assert!(diff <= 1e-12, "Choi difference {diff:.3e}");
    }

    #[test]
    fn compose_unitary_basics() {
        let ls = landau_streater();
        let same = compose_unitary(&ls, &CMatrix::identity(3)).unwrap();
        assert!((&to_choi(&same).matrix - &to_choi(&ls).matrix).max_abs() < 1e-15);
        assert!(same.verify_unital() <= 1e-14);
        let not_unitary = CMatrix::diag(&[1.0, 2.0, 1.0]);
        assert!(compose_unitary(&ls, &not_unitary).is_err());
    }

    #[test]
    fn random_unitary_is_unitary_and_deterministic() {
        let u = random_unitary(3, 42);
        assert!(unitarity_residual(&u) < 1e-12);
        let v = random_unitary(3, 42);
        assert!((&u - &v).max_abs() == 0.0);
        let w = random_unitary(3, 43);
        assert!((&u - &w).max_abs() > 1e-3);
    }

    #[test]
    fn random_unitary_first_moment() {
        // Monte-Carlo check of E[U ρ U†] ≈ tr(ρ)·1/d
        let d = 3;
        let rho = rand_hermitian(d, 7);
        let n = 3000;
        let mut acc = CMatrix::zeros(d, d);
        for s in 0..n {
            let u = random_unitary(d, 1000 + s as u64);
            acc += &rho.conjugate_by(&u);
        }
        let avg = acc.scale_re(1.0 / n as f64);
        let expect = CMatrix::identity(d).scale(rho.trace() / C64::new(d as f64, 0.0));
        assert!((&avg - &expect).max_abs() < 0.05 * rho.max_abs().max(1.0));
    }

    #[test]
    fn random_mu_channel_is_unital() {
        let (ch, dec) = random_mu_channel(3, 5, 11).unwrap();
        assert!(ch.verify_cpt() < 1e-12);
        assert!(ch.verify_unital() < 1e-12);
        assert_eq!(dec.unitaries().len(), 5);
        assert!((dec.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(random_mu_channel(3, 0, 1).is_err());
    }

    #[test]
    fn mu_choi_is_mixture_of_maximally_entangled_projectors() {
        // The Choi of an MU channel is the convex combination of the
        // maximally entangled projectors built from its decomposition.
        // (The eigenvectors of that combination are generally *not*
        // maximally entangled themselves, so the spot check works on the
        // decomposition vectors and on the reconstruction.)
        let (ch, dec) = random_mu_channel(3, 4, 23).unwrap();
        let d = 3;
        let e = to_choi(&ch);
        let dims = DimSpec::new(&[d, d]).unwrap();
        let phi = bell_vector(d).unwrap();
        let mut recon = CMatrix::zeros(d * d, d * d);
        for (u, &p) in dec.unitaries().iter().zip(dec.probs().iter()) {
            let v = kron(&CMatrix::identity(d), u).matmul(&phi);
            let proj = v.matmul(&v.dagger());
            // each component is maximally entangled: both marginals = 1
            for traced in [0usize, 1] {
                let marg = partial_trace(&proj, &dims, &[traced]).unwrap();
                assert!((&marg - &CMatrix::identity(d)).max_abs() < 1e-12);
            }
            recon += &proj.scale_re(p);
        }
        assert!((&recon - &e.matrix).max_abs() < 1e-12);
        // and the mixture itself has maximally mixed marginals
        assert!(e.cpt_residual() < 1e-12);
        assert!(e.unitality_residual() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let ch = hmr_benchmark();
        let text = ch.to_json();
        let back = Channel::from_json(&text).unwrap();
        assert_eq!(back.dim(), 3);
        for (a, b) in ch.kraus().iter().zip(back.kraus().iter()) {
            assert!((a - b).max_abs() < 1e-15);
        }
        assert!(Channel::from_json("{\"d\": 2, \"kraus\": []}").is_err());

        let (_, dec) = random_mu_channel(2, 3, 9).unwrap();
        let back = MuDecomposition::from_json(&dec.to_json()).unwrap();
        assert_eq!(back.unitaries().len(), 3);
    }

    #[test]
    fn rejects_bad_mixtures() {
        let id = identity_channel(3).unwrap();
        let ls = landau_streater();
        assert!(mix(&[id.clone(), ls.clone()], &[0.5, 0.4]).is_err());
        assert!(mix(&[id.clone()], &[0.5, 0.5]).is_err());
        let id2 = identity_channel(2).unwrap();
        assert!(mix(&[id, id2], &[0.5, 0.5]).is_err());
    }
}
