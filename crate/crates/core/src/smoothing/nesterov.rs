use alloc::format;
use alloc::vec::Vec;

use super::smoothed::{SmoothedScalar, TailMode};
use crate::num::{self, E};
use crate::scalar::ScalarConcave;
use crate::{Error, Result};

/// Grid intervals used when sampling a closed-form smoothing.
pub const DEFAULT_NESTEROV_GRID: usize = 2000;

/// A closed-form smoothing together with the parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct NesterovSmoothing {
    pub smoothed: SmoothedScalar,
    pub theta: f64,
    pub gamma: f64,
}

impl NesterovSmoothing {
    /// `1 / (1 + (1 + 1/(e-1)) gamma)`, the ratio bound attached to this
    /// smoothing of a budget penalty.
    pub fn ratio_bound(&self) -> f64 {
        1.0 / (1.0 + (1.0 + 1.0 / (E - 1.0)) * self.gamma)
    }
}

/// Derivative of the smoothed penalty `-l (u - b)_+`:
/// `(theta/(e-1)) (1 - e^{gamma u / b})`, clipped to `[-l, 0]`.
fn hinge_slope(l: f64, theta: f64, gamma: f64, b: f64, u: f64) -> f64 {
    let y = theta / (E - 1.0) * (1.0 - num::exp(gamma * u / b));
    y.max(-l).min(0.0)
}

/// Point where the smoothed penalty derivative reaches `-l`.
fn hit_point(l: f64, theta: f64, gamma: f64, b: f64) -> f64 {
    b * num::ln_1p(l * (E - 1.0) / theta) / gamma
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} = {v} must be positive and finite")))
    }
}

fn sample_hinge(l: f64, theta: f64, gamma: f64, b: f64, d: usize) -> Result<SmoothedScalar> {
    let horizon = hit_point(l, theta, gamma, b);
    let h = horizon / d as f64;
    let mut y: Vec<f64> = (0..=d).map(|t| hinge_slope(l, theta, gamma, b, t as f64 * h)).collect();
    y[d] = -l;
    SmoothedScalar::new(h, y, TailMode::HoldLast)
}

/// Smoothing of `G(u) = -l (u - 1)_+` with `gamma = ln(1 + l(e-1)/theta)`.
///
/// The returned derivative is that of the penalty alone; add the linear
/// reward with [`SmoothedScalar::shifted`].
pub fn nesterov_penalty_smoothing(l: f64, theta: f64) -> Result<NesterovSmoothing> {
    nesterov_penalty_smoothing_with(l, theta, 1.0, DEFAULT_NESTEROV_GRID)
}

/// As [`nesterov_penalty_smoothing`] with budget `b` and grid size `d`.
pub fn nesterov_penalty_smoothing_with(l: f64, theta: f64, b: f64, d: usize) -> Result<NesterovSmoothing> {
    check_pos("l", l)?;
    check_pos("theta", theta)?;
    check_pos("b", b)?;
    let gamma = num::ln_1p(l * (E - 1.0) / theta);
    Ok(NesterovSmoothing { smoothed: sample_hinge(l, theta, gamma, b, d)?, theta, gamma })
}

/// Smoothing of the log-det budget penalty `-l (u - b)_+` with
/// `theta = ln(1 + 1/n)` and `gamma = ln(1 + l/theta)`.
pub fn nesterov_logdet_smoothing(n: usize, l: f64, b: f64) -> Result<NesterovSmoothing> {
    if n == 0 {
        return Err(Error::Invalid("dimension n must be at least 1".into()));
    }
    check_pos("l", l)?;
    check_pos("b", b)?;
    let theta = num::ln_1p(1.0 / n as f64);
    let gamma = num::ln_1p(l / theta);
    Ok(NesterovSmoothing { smoothed: sample_hinge(l, theta, gamma, b, DEFAULT_NESTEROV_GRID)?, theta, gamma })
}

/// Smooths every hinge of a piecewise-linear base with a common `gamma`,
/// choosing each hinge's `theta` so its derivative reaches `-l_j` exactly at
/// its kink. `gamma = 1` on the cap gives the adwords smoothing.
pub fn nesterov_hinge_sum(base: &ScalarConcave, gamma: f64, d: usize) -> Result<SmoothedScalar> {
    check_pos("gamma", gamma)?;
    let form = base
        .hinge_form()
        .ok_or_else(|| Error::Invalid("hinge smoothing needs a piecewise-linear base".into()))?;
    if form.hinges.is_empty() {
        return SmoothedScalar::new(1.0 / d as f64, alloc::vec![form.s0; d + 1], TailMode::HoldLast);
    }
    if form.hinges.iter().any(|&(b, _)| !(b > 0.0)) {
        return Err(Error::Invalid("hinge smoothing needs kinks at positive u".into()));
    }
    let horizon = form.hinges.iter().map(|&(b, _)| b).fold(0.0, f64::max);
    let h = horizon / d as f64;
    let thetas: Vec<f64> = form.hinges.iter().map(|&(_, l)| l * (E - 1.0) / (num::exp(gamma) - 1.0)).collect();
    let last = form.s0 - form.hinges.iter().map(|&(_, l)| l).sum::<f64>();
    let mut y: Vec<f64> = (0..=d)
        .map(|t| {
            let u = t as f64 * h;
            form.s0
                + form
                    .hinges
                    .iter()
                    .zip(&thetas)
                    .map(|(&(b, l), &theta)| hinge_slope(l, theta, gamma, b, u))
                    .sum::<f64>()
        })
        .collect();
    y[d] = last;
    let tail = if num::abs(last) <= 1e-12 {
        y[d] = 0.0;
        TailMode::Zero
    } else {
        TailMode::HoldLast
    };
    SmoothedScalar::new(h, y, tail)
}
