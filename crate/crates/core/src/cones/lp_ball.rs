use alloc::vec;
use alloc::vec::Vec;

use crate::num;

/// `d_1(u, B_p)` with the subgradient interval of the distance.
#[derive(Clone, Debug, PartialEq)]
pub struct LpDistance {
    pub value: f64,
    /// Level `r_u` with `||u ^ r_u||_p = 1`; `None` strictly inside the ball.
    pub r: Option<f64>,
    pub grad_lo: Vec<f64>,
    pub grad_hi: Vec<f64>,
}

fn p_norm(u: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        u.iter().sum()
    } else {
        num::powf(u.iter().map(|v| num::powf(*v, p)).sum::<f64>(), 1.0 / p)
    }
}

fn capped_norm(u: &[f64], r: f64, p: f64) -> f64 {
    if p == 1.0 {
        u.iter().map(|v| v.min(r)).sum()
    } else {
        num::powf(u.iter().map(|v| num::powf(v.min(r), p)).sum::<f64>(), 1.0 / p)
    }
}

/// l1 distance from `u >= 0` to the unit l_p ball (`p >= 1`).
///
/// The nearest point is `u ^ r_u` (coordinatewise `min(u_i, r_u)`), where
/// `r_u` solves `||u ^ r||_p = 1` and is found by bisection.
pub fn lp_ball_distance(u: &[f64], p: f64) -> LpDistance {
    assert!(p >= 1.0, "p must be at least 1");
    let n = u.len();
    let norm = p_norm(u, p);
    let zeros = vec![0.0; n];
    if norm < 1.0 - 1e-12 {
        return LpDistance { value: 0.0, r: None, grad_lo: zeros.clone(), grad_hi: zeros };
    }
    let umax = u.iter().copied().fold(0.0, f64::max);
    let grad_at = |r: f64| -> Vec<f64> { u.iter().map(|v| num::powf(v.min(r) / r, p - 1.0)).collect() };
    if norm <= 1.0 + 1e-12 {
        return LpDistance { value: 0.0, r: Some(umax), grad_lo: zeros, grad_hi: grad_at(umax) };
    }
    let (mut lo, mut hi) = (0.0, umax);
    while hi - lo > 1e-12 * umax {
        let mid = 0.5 * (lo + hi);
        if capped_norm(u, mid, p) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let value = u.iter().map(|v| num::pos(v - r)).sum();
    let g = grad_at(r);
    LpDistance { value, r: Some(r), grad_lo: g.clone(), grad_hi: g }
}

/// Dual norm exponent `q = p / (p - 1)`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub fn q_norm(v: &[f64], q: f64) -> f64 {
    let m = v.iter().map(|x| num::abs(*x)).fold(0.0, f64::max);
    if q.is_infinite() || m == 0.0 {
        m
    } else {
        // Scaled by the max entry so large q cannot overflow.
        m * num::powf(v.iter().map(|x| num::powf(num::abs(*x) / m, q)).sum::<f64>(), 1.0 / q)
    }
}
