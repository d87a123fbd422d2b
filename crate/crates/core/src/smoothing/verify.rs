use alloc::vec::Vec;

use super::smoothed::SmoothedScalar;
use crate::scalar::ScalarConcave;

/// Refinement of the verification grid relative to the design grid.
pub const VERIFY_FACTOR: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyPoint {
    pub u: f64,
    /// `psi_S(u) + c (y(0) - y(u)) - psi*(y(u))`.
    pub numerator: f64,
    pub psi: f64,
}

impl VerifyPoint {
    pub fn ratio(&self) -> f64 {
        self.numerator / self.psi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub sup_beta: f64,
    pub argmax_u: f64,
    pub points: Vec<VerifyPoint>,
}

impl VerifyReport {
    /// `max_u numerator(u) - beta psi(u)`; non-positive iff `beta` is certified.
    pub fn max_residual(&self, beta: f64) -> f64 {
        self.points.iter().map(|p| p.numerator - beta * p.psi).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Points of the verification grid: `k h / factor` for `k >= 1`, starting
/// at `h` when the base has an infinite slope at 0 (the first cell is not
/// certified there).
fn grid(smoothed: &SmoothedScalar, base: &ScalarConcave, factor: usize) -> impl Iterator<Item = f64> {
    let factor = factor.max(1);
    let step = smoothed.h() / factor as f64;
    let first = if base.slope_at_zero().is_finite() { 1 } else { factor };
    (first..=factor * smoothed.d()).map(move |k| k as f64 * step)
}

/// Sup over the grid of `(psi_S(u) + c (y(0) - y(u)) - psi*(y(u))) / psi(u)`
/// at 4x the design resolution; points with `psi(u) <= 0` are skipped.
pub fn verify_beta(smoothed: &SmoothedScalar, base: &ScalarConcave, c: Option<f64>) -> VerifyReport {
    verify_beta_at(smoothed, base, c, VERIFY_FACTOR)
}

pub fn verify_beta_at(smoothed: &SmoothedScalar, base: &ScalarConcave, c: Option<f64>, factor: usize) -> VerifyReport {
    let c = c.unwrap_or(0.0);
    let y0 = smoothed.slope(0.0);
    let mut report = VerifyReport { sup_beta: f64::NEG_INFINITY, argmax_u: 0.0, points: Vec::new() };
    let first = right_limit_at_zero(smoothed, base, c, factor.max(1));
    let rest = grid(smoothed, base, factor).filter_map(|u| {
        let psi = base.value(u);
        if !(psi > 0.0) {
            return None;
        }
        let y = smoothed.slope(u);
        let seq = if c != 0.0 { c * (y0 - y) } else { 0.0 };
        Some(VerifyPoint { u, numerator: smoothed.value(u) + seq - base.conjugate(y), psi })
    });
    for p in first.into_iter().chain(rest) {
        if p.ratio() > report.sup_beta || report.points.is_empty() {
            report.sup_beta = p.ratio();
            report.argmax_u = p.u;
        }
        report.points.push(p);
    }
    report
}

/// Limit of the ratio as `u -> 0+`, where both sides vanish. Inside the
/// first cell `y` is linear, so the ratio is monotone there and the limit
/// can exceed every grid value. Reported at `u = 0` with `psi` scaled to the
/// first grid point.
fn right_limit_at_zero(smoothed: &SmoothedScalar, base: &ScalarConcave, c: f64, factor: usize) -> Option<VerifyPoint> {
    let slope0 = base.slope_at_zero();
    if !slope0.is_finite() || !(slope0 > 0.0) {
        return None;
    }
    let h = smoothed.h();
    let y0 = smoothed.slope(0.0);
    let s = (y0 - smoothed.slope(h)) / h;
    let tol = 1e-12 * (1.0 + slope0);
    let ratio = if y0 > slope0 + tol {
        (y0 + c * s) / slope0
    } else if y0 >= slope0 - tol {
        let piece0 = base.level_set(slope0).1;
        if s == 0.0 { y0 / slope0 } else { (y0 + s * (c + piece0)) / slope0 }
    } else {
        f64::INFINITY
    };
    let psi = base.value(h / factor as f64);
    Some(VerifyPoint { u: 0.0, numerator: ratio * psi, psi })
}

/// `sup_u c (y(0) - y(u)) / psi(u)` over the verification grid.
pub fn kappa_of(smoothed: &SmoothedScalar, base: &ScalarConcave, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let y0 = smoothed.slope(0.0);
    grid(smoothed, base, VERIFY_FACTOR)
        .filter_map(|u| {
            let psi = base.value(u);
            (psi > 0.0).then(|| c * (y0 - smoothed.slope(u)) / psi)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{self, E};
    use crate::smoothing::TailMode;
    use alloc::vec;

    #[test]
    fn unsmoothed_cap_has_beta_two() {
        let cap = ScalarConcave::cap();
        let s = SmoothedScalar::from_base(&cap, 1e-3, 1000, TailMode::Zero).unwrap();
        let r = verify_beta(&s, &cap, None);
        // The last cell ramps y from 1 to 0, costing h/2 of psi_S.
        assert!((r.sup_beta - 2.0).abs() < 1e-3, "{}", r.sup_beta);
        assert!((r.argmax_u - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adwords_smoothing_certifies_e_over_e_minus_1() {
        let d = 1000;
        let h = 1.0 / d as f64;
        let y = (0..=d).map(|t| (E - num::exp(t as f64 * h)) / (E - 1.0)).collect::<Vec<_>>();
        let mut y = y;
        y[d] = 0.0;
        let s = SmoothedScalar::new(h, y, TailMode::Zero).unwrap();
        let r = verify_beta(&s, &ScalarConcave::cap(), None);
        assert!((r.sup_beta - E / (E - 1.0)).abs() < 1e-3, "{}", r.sup_beta);
    }

    #[test]
    fn linear_is_one_and_has_no_kappa() {
        let f = ScalarConcave::linear(1.0);
        let s = SmoothedScalar::new(0.1, vec![1.0; 11], TailMode::HoldLast).unwrap();
        let r = verify_beta(&s, &f, Some(0.3));
        assert!((r.sup_beta - 1.0).abs() < 1e-12);
        assert_eq!(kappa_of(&s, &f, 0.3), 0.0);
        assert!(r.max_residual(1.0 + 1e-9) < 0.0);
    }
}
