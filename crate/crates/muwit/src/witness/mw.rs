//! The Mendl–Wolf witness for qutrit channels, evaluated in closed form.

use super::{
    validate_unital_choi, SolveStats, WitnessError, WitnessKind, WitnessResult, WitnessStatus,
};
use crate::channels::ChoiMatrix;
use crate::qmat::{swap_operator, CMatrix};

/// W = (1/3)(3𝔽 + 1) on the 9-dimensional doubled qutrit space.
pub fn mendl_wolf_operator() -> CMatrix {
    let f = swap_operator(3).expect("d = 3");
    &f + &CMatrix::identity(9).scale_re(1.0 / 3.0)
}

/// Exact witness value tr[W E_u]; negative values certify a non-MU channel.
/// Defined for d = 3 only (the even-dimensional extension is trivial).
pub fn s_mw(choi: &ChoiMatrix, eps_detect: f64) -> Result<WitnessResult, WitnessError> {
    if choi.dim() != 3 {
        return Err(WitnessError::MendlWolfDimension(choi.dim()));
    }
    validate_unital_choi(choi)?;
    let w = mendl_wolf_operator();
    let value = w.inner_re(choi.matrix());
    Ok(WitnessResult {
        kind: WitnessKind::Mw,
        value,
        status: WitnessStatus::Exact,
        detected: value < -eps_detect,
        certificate: None,
        stats: SolveStats::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        depolarizing, identity_channel, landau_streater, mix_pair, to_choi,
    };

    #[test]
    fn exact_values_on_the_zoo() {
        let id = to_choi(&identity_channel(3).unwrap());
        let ls = to_choi(&landau_streater());
        let dep = to_choi(&depolarizing(3).unwrap());
        assert!((s_mw(&id, 1e-6).unwrap().value - 4.0).abs() < 1e-12);
        assert!((s_mw(&ls, 1e-6).unwrap().value + 2.0).abs() < 1e-12);
        assert!((s_mw(&dep, 1e-6).unwrap().value - 2.0).abs() < 1e-12);
        assert!(s_mw(&ls, 1e-6).unwrap().detected);
        assert!(!s_mw(&id, 1e-6).unwrap().detected);
    }

    #[test]
    fn identity_ls_family_crosses_at_one_third() {
        // s_MW(p·1 + (1−p)·LS) = 4p − 2(1−p) = 6p − 2
        let id = identity_channel(3).unwrap();
        let ls = landau_streater();
        for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            let e = to_choi(&mix_pair(&id, &ls, p).unwrap());
            let v = s_mw(&e, 1e-6).unwrap().value;
            assert!((v - (6.0 * p - 2.0)).abs() < 1e-12, "p={p}: {v}");
        }
    }

    #[test]
    fn scaling_preserves_sign() {
        // s_MW(c·E) = c·s_MW(E): evaluate the linear functional directly
        let ls = to_choi(&landau_streater());
        let w = mendl_wolf_operator();
        let raw = w.inner_re(ls.matrix());
        let scaled = w.inner_re(&ls.matrix().scale_re(0.37));
        assert!((scaled - 0.37 * raw).abs() < 1e-12);
        assert!(raw < 0.0 && scaled < 0.0);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let id2 = to_choi(&identity_channel(2).unwrap());
        assert!(matches!(
            s_mw(&id2, 1e-6),
            Err(WitnessError::MendlWolfDimension(2))
        ));
    }
}
