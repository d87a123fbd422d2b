use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::lp_ball::{dual_exponent, lp_ball_distance, q_norm};
use super::step::Step;
use crate::scalar::{ScalarConcave, SupergradInterval};
use crate::smoothing::{nesterov_penalty_smoothing_with, SmoothedScalar, DEFAULT_NESTEROV_GRID};
use crate::{Error, Result};

/// One coordinate of a separable objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Scalar(ScalarConcave),
    Smoothed(SmoothedScalar),
}

impl Coord {
    pub fn value(&self, u: f64) -> f64 {
        match self {
            Coord::Scalar(f) => f.value(u),
            Coord::Smoothed(s) => s.value(u),
        }
    }

    pub fn supergrad(&self, u: f64) -> SupergradInterval {
        match self {
            Coord::Scalar(f) => f.supergrad(u),
            Coord::Smoothed(s) => s.supergrad(u),
        }
    }

    pub fn conjugate(&self, y: f64) -> f64 {
        match self {
            Coord::Scalar(f) => f.conjugate(y),
            Coord::Smoothed(s) => {
                let (lo, _) = s.level_set(y);
                if lo.is_finite() {
                    y * lo - s.value(lo)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// `{u : v in supergrad(u)}`.
    pub fn level_set(&self, v: f64) -> (f64, f64) {
        match self {
            Coord::Scalar(f) => f.level_set(v),
            Coord::Smoothed(s) => s.level_set(v),
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, Coord::Smoothed(_))
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            Coord::Scalar(f) => f.is_monotone(),
            Coord::Smoothed(s) => s.samples().iter().all(|&v| v >= 0.0),
        }
    }

    pub fn as_scalar(&self) -> Option<&ScalarConcave> {
        match self {
            Coord::Scalar(f) => Some(f),
            Coord::Smoothed(_) => None,
        }
    }
}

impl From<ScalarConcave> for Coord {
    fn from(f: ScalarConcave) -> Self {
        Coord::Scalar(f)
    }
}

impl From<SmoothedScalar> for Coord {
    fn from(s: SmoothedScalar) -> Self {
        Coord::Smoothed(s)
    }
}

/// `psi(u) = sum_i psi_i(u_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableObjective {
    pub coords: Vec<Coord>,
}

impl SeparableObjective {
    pub fn new(coords: Vec<Coord>) -> Self {
        Self { coords }
    }

    pub fn uniform(coord: Coord, n: usize) -> Self {
        Self { coords: alloc::vec![coord; n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Penalty used by the exact-penalty online LP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyKind {
    /// `-l sum_i (u_i - b_i)_+`.
    SeparableCap,
    /// `-l d_1(u, B_p)` (unit budgets only).
    LpBall { p: f64 },
}

/// `psi(v, u) = v + G(u)` over the stacked output `(c^T x, B x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyLpObjective {
    pub kind: PenaltyKind,
    pub l: f64,
    pub budget: Vec<f64>,
    pub theta: f64,
}

impl PenaltyLpObjective {
    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.theta > 0.0) {
            return Err(Error::Invalid("l and theta must be positive".into()));
        }
        if self.budget.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Invalid("budgets must be positive".into()));
        }
        if let PenaltyKind::LpBall { p } = self.kind {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::Invalid(format!("p = {p} must be in [1, inf)")));
            }
            if self.budget.iter().any(|b| *b != 1.0) {
                return Err(Error::Invalid("the l_p-ball penalty uses unit budgets".into()));
            }
        }
        Ok(())
    }

    /// The objective on the orthant; `smoothed` swaps each separable
    /// penalty for its closed-form smoothing.
    pub fn orthant(&self, smoothed: bool) -> Result<OrthantObjective> {
        self.validate()?;
        match self.kind {
            PenaltyKind::SeparableCap => {
                let mut coords = Vec::with_capacity(1 + self.budget.len());
                coords.push(Coord::Scalar(ScalarConcave::linear(1.0)));
                for &b in &self.budget {
                    coords.push(if smoothed {
                        let s = nesterov_penalty_smoothing_with(self.l, self.theta, b, DEFAULT_NESTEROV_GRID)?;
                        Coord::Smoothed(s.smoothed)
                    } else {
                        Coord::Scalar(ScalarConcave::penalty(self.l, b)?)
                    });
                }
                Ok(OrthantObjective::Separable(SeparableObjective::new(coords)))
            }
            PenaltyKind::LpBall { p } => {
                if smoothed {
                    return Err(Error::Invalid("no closed-form smoothing for the l_p-ball penalty".into()));
                }
                Ok(OrthantObjective::LpBall(LpBallObjective { l: self.l, p, n: self.budget.len() }))
            }
        }
    }
}

/// `psi(v, u) = v - l d_1(u, B_p)` with `u` in `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpBallObjective {
    pub l: f64,
    pub p: f64,
    pub n: usize,
}

/// An objective on the nonnegative orthant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum OrthantObjective {
    Separable(SeparableObjective),
    LpBall(LpBallObjective),
}

impl OrthantObjective {
    pub fn dim(&self) -> usize {
        match self {
            OrthantObjective::Separable(s) => s.dim(),
            OrthantObjective::LpBall(b) => 1 + b.n,
        }
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(())
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        Ok(match self {
            OrthantObjective::Separable(s) => s.coords.iter().zip(u).map(|(c, &ui)| c.value(ui)).sum(),
            OrthantObjective::LpBall(b) => u[0] - b.l * lp_ball_distance(&u[1..], b.p).value,
        })
    }

    /// Coordinatewise smallest supergradient.
    pub fn min_supergrad(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(match self {
            OrthantObjective::Separable(s) => s.coords.iter().zip(u).map(|(c, &ui)| c.supergrad(ui).lo).collect(),
            OrthantObjective::LpBall(b) => {
                let d = lp_ball_distance(&u[1..], b.p);
                core::iter::once(1.0).chain(d.grad_hi.iter().map(|g| -b.l * g)).collect()
            }
        })
    }

    /// Largest supergradient (used by the Assumption-1 check).
    pub fn max_supergrad(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(match self {
            OrthantObjective::Separable(s) => s.coords.iter().zip(u).map(|(c, &ui)| c.supergrad(ui).hi).collect(),
            OrthantObjective::LpBall(b) => {
                let d = lp_ball_distance(&u[1..], b.p);
                core::iter::once(1.0).chain(d.grad_lo.iter().map(|g| -b.l * g)).collect()
            }
        })
    }

    /// `psi*(y)`, `-inf` outside the domain.
    pub fn conjugate(&self, y: &[f64]) -> Result<f64> {
        self.check(y)?;
        Ok(match self {
            OrthantObjective::Separable(s) => s.coords.iter().zip(y).map(|(c, &yi)| c.conjugate(yi)).sum(),
            OrthantObjective::LpBall(b) => {
                if y[0] < 1.0 || y[1..].iter().any(|&v| v < -b.l) {
                    f64::NEG_INFINITY
                } else {
                    let neg: Vec<f64> = y[1..].iter().map(|&v| (-v).max(0.0)).collect();
                    -q_norm(&neg, dual_exponent(b.p))
                }
            }
        })
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            OrthantObjective::Separable(s) => s.coords.iter().all(Coord::is_monotone),
            OrthantObjective::LpBall(_) => false,
        }
    }

    pub fn as_separable(&self) -> Option<&SeparableObjective> {
        match self {
            OrthantObjective::Separable(s) => Some(s),
            OrthantObjective::LpBall(_) => None,
        }
    }
}

/// `sum_t sigma_t(A_t^T y) - psi*(y)`; `+inf` when `y` is outside the
/// conjugate's domain. An upper bound on the offline optimum.
pub fn dual_objective(obj: &OrthantObjective, steps: &[Step], y: &[f64]) -> Result<f64> {
    let conj = obj.conjugate(y)?;
    if conj == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let mut total = 0.0;
    for step in steps {
        if step.a.out_dim() != Some(obj.dim()) {
            return Err(Error::DimensionMismatch { expected: obj.dim(), found: step.a.out_dim().unwrap_or(0) });
        }
        total += step.f.support(&step.a.transpose_apply(y))?.0;
    }
    Ok(total - conj)
}
