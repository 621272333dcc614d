//! Witness scans over convex channel families 𝓔_p = p·𝓔_A + (1−p)·𝓔_B.
//!
//! Grid points are evaluated in order with warm starts chained from the
//! previous point (the p-dependence is a small perturbation of the problem
//! data). Sign changes of value + ε are localized by bisection.

use super::sqm::SqmEngine;
use super::{
    relaxed::relaxed_with_start, s_mw, WitnessError, WitnessKind, WitnessResult,
    WitnessSettings, WitnessStatus,
};
use crate::channels::{to_choi, Channel, ChoiMatrix};
use crate::conic::WarmStart;
use crate::qmat::CMatrix;

/// Witness outcome at one family parameter.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub p: f64,
    pub result: WitnessResult,
}

/// Scan of one witness over a two-channel family.
#[derive(Debug, Clone)]
pub struct FamilyScan {
    pub kind: WitnessKind,
    pub points: Vec<ScanPoint>,
    /// Bisection-refined locations where value + ε changes sign.
    pub thresholds: Vec<f64>,
    /// Maximal parameter intervals with detected = true, boundary points
    /// refined where a threshold was localized.
    pub detected_intervals: Vec<(f64, f64)>,
    /// Number of evaluations that ended without a conclusive status.
    pub failures: usize,
}

struct FamilyEvaluator<'a> {
    e_a: CMatrix,
    e_b: CMatrix,
    d: usize,
    kind: WitnessKind,
    settings: &'a WitnessSettings,
    engine: Option<SqmEngine>,
    warm: Option<WarmStart>,
}

impl<'a> FamilyEvaluator<'a> {
    fn new(
        a: &Channel,
        b: &Channel,
        kind: WitnessKind,
        settings: &'a WitnessSettings,
    ) -> Result<Self, WitnessError> {
        if a.dim() != b.dim() {
            return Err(WitnessError::InvalidInput(
                "family endpoints differ in dimension".into(),
            ));
        }
        let e_a = to_choi(a);
        let e_b = to_choi(b);
        let engine = match kind {
            WitnessKind::Qm => Some(SqmEngine::for_family(&[&e_a, &e_b])?),
            _ => None,
        };
        Ok(Self {
            d: a.dim(),
            e_a: e_a.matrix().clone(),
            e_b: e_b.matrix().clone(),
            kind,
            settings,
            engine,
            warm: None,
        })
    }

    fn choi_at(&self, p: f64) -> Result<ChoiMatrix, WitnessError> {
        let m = &self.e_a.scale_re(p) + &self.e_b.scale_re(1.0 - p);
        Ok(ChoiMatrix::from_matrix(self.d, m)?)
    }

    fn eval(&mut self, p: f64) -> Result<WitnessResult, WitnessError> {
        let choi = self.choi_at(p)?;
        match self.kind {
            WitnessKind::Mw => s_mw(&choi, self.settings.eps_detect),
            WitnessKind::Qm => {
                let engine = self.engine.as_ref().expect("engine built for QM scans");
                let (res, warm) = engine.evaluate(&choi, self.settings, self.warm.as_ref())?;
                self.warm = Some(warm);
                Ok(res)
            }
            WitnessKind::WRelaxed | WitnessKind::WR => {
                let with_q = self.kind == WitnessKind::WRelaxed;
                let (res, warm) =
                    relaxed_with_start(&choi, with_q, self.settings, self.warm.as_ref())?;
                self.warm = Some(warm);
                Ok(res)
            }
        }
    }
}

/// Evaluate one witness over the grid of mixing parameters; optionally
/// refine every sign change of value + ε by bisection (≤ 20 steps, final
/// bracket width ≤ 1e−3). Solver failures are recorded per point and the
/// scan continues.
pub fn scan_family(
    a: &Channel,
    b: &Channel,
    kind: WitnessKind,
    grid: &[f64],
    refine: bool,
    settings: &WitnessSettings,
) -> Result<FamilyScan, WitnessError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(WitnessError::InvalidInput(
            "grid must be nonempty and strictly increasing".into(),
        ));
    }
    let mut ev = FamilyEvaluator::new(a, b, kind, settings)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = 0usize;
    for &p in grid {
        let result = ev.eval(p)?;
        if !result.status.is_conclusive() {
            failures += 1;
        }
        points.push(ScanPoint { p, result });
    }

    // values shifted by the detection threshold; sign changes of this
    // function bound the detected set
    let eps = settings.eps_detect;
    let shifted = |r: &WitnessResult| r.value + eps;
    let mut thresholds = Vec::new();
    if refine {
        for win in 0..points.len() - 1 {
            let (lo, hi) = (&points[win], &points[win + 1]);
            if !lo.result.status.is_conclusive() || !hi.result.status.is_conclusive() {
                continue;
            }
            let (mut lo_p, mut lo_f) = (lo.p, shifted(&lo.result));
            let (mut hi_p, mut hi_f) = (hi.p, shifted(&hi.result));
            if lo_f == 0.0 || hi_f == 0.0 || lo_f.signum() == hi_f.signum() {
                continue;
            }
            for _ in 0..20 {
                if hi_p - lo_p <= 1e-3 {
                    break;
                }
                let mid = 0.5 * (lo_p + hi_p);
                match ev.eval(mid) {
                    Ok(res) if res.status.is_conclusive() => {
                        let f = shifted(&res);
                        if f.signum() == lo_f.signum() {
                            lo_p = mid;
                            lo_f = f;
                        } else {
                            hi_p = mid;
                            hi_f = f;
                        }
                    }
                    _ => {
                        failures += 1;
                        break;
                    }
                }
            }
            thresholds.push(0.5 * (lo_p + hi_p));
        }
    }

    // maximal runs of detected grid points, with refined boundaries where
    // a threshold landed inside the adjacent gap
    let mut detected_intervals = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if points[i].result.detected {
            let start_idx = i;
            while i + 1 < points.len() && points[i + 1].result.detected {
                i += 1;
            }
            let mut left = points[start_idx].p;
            let mut right = points[i].p;
            if start_idx > 0 {
                if let Some(&t) = thresholds
                    .iter()
                    .find(|&&t| t >= points[start_idx - 1].p && t <= points[start_idx].p)
                {
                    left = t;
                }
            }
            if i + 1 < points.len() {
                if let Some(&t) = thresholds
                    .iter()
                    .find(|&&t| t >= points[i].p && t <= points[i + 1].p)
                {
                    right = t;
                }
            }
            detected_intervals.push((left, right));
        }
        i += 1;
    }

    Ok(FamilyScan { kind, points, thresholds, detected_intervals, failures })
}

/// Scale the scan's values by 1/|value at the first grid point|, the
/// normalization used for family plots: the reference point maps to −1
/// when its value is negative.
pub fn normalize_reference(scan: &FamilyScan) -> Result<Vec<f64>, WitnessError> {
    let reference = scan
        .points
        .first()
        .ok_or_else(|| WitnessError::InvalidInput("empty scan".into()))?
        .result
        .value
        .abs();
    if reference < 1e-9 {
        return Err(WitnessError::InvalidInput(format!(
            "reference value {reference:.3e} too small to normalize against"
        )));
    }
    Ok(scan.points.iter().map(|pt| pt.result.value / reference).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{identity_channel, landau_streater};

    #[test]
    fn mw_scan_crosses_at_one_third() {
        let id = identity_channel(3).unwrap();
        let ls = landau_streater();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let scan = scan_family(&id, &ls, WitnessKind::Mw, &grid, true, &Default::default())
            .unwrap();
        assert_eq!(scan.failures, 0);
        assert_eq!(scan.thresholds.len(), 1);
        assert!((scan.thresholds[0] - 1.0 / 3.0).abs() < 5e-3, "{:?}", scan.thresholds);
        // detected exactly below the crossing
        assert_eq!(scan.detected_intervals.len(), 1);
        let (lo, hi) = scan.detected_intervals[0];
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn normalization_fixes_reference_to_minus_one() {
        let id = identity_channel(3).unwrap();
        let ls = landau_streater();
        let grid = [0.0, 0.2, 0.5];
        let scan =
            scan_family(&id, &ls, WitnessKind::Mw, &grid, false, &Default::default()).unwrap();
        let scaled = normalize_reference(&scan).unwrap();
        assert!((scaled[0] + 1.0).abs() < 1e-12);
        // positive scaling preserves signs
        for (pt, s) in scan.points.iter().zip(scaled.iter()) {
            assert_eq!(pt.result.value.signum(), s.signum());
        }
    }

    #[test]
    fn rejects_bad_grid() {
        let id = identity_channel(3).unwrap();
        let ls = landau_streater();
        assert!(scan_family(&id, &ls, WitnessKind::Mw, &[], false, &Default::default()).is_err());
        assert!(
            scan_family(&id, &ls, WitnessKind::Mw, &[0.5, 0.5], false, &Default::default())
                .is_err()
        );
    }
}
