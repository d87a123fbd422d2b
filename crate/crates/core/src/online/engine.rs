use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::solvers::{coordinate_max, maximize_unit, InnerMethod};
use crate::cones::linalg::Mat;
use crate::cones::{Coord, LogDetObjective, LogDetState, OrthantObjective, Step, StepMatrix};
use crate::{Error, Result};

/// Shift applied to the point where duals are read when the objective has
/// an unbounded slope at the origin.
pub const INTERIOR_SHIFT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Best response to the dual at the pre-step point.
    Sequential,
    /// Coordinate maximization of the objective at each step.
    Simultaneous,
}

/// What the engine runs on. `run` is what the algorithm maximizes (possibly
/// smoothed); certificates are computed against `original`.
#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Orthant { run: OrthantObjective, original: OrthantObjective },
    LogDet(LogDetObjective),
}

impl Problem {
    pub fn orthant(obj: OrthantObjective) -> Self {
        Problem::Orthant { run: obj.clone(), original: obj }
    }

    pub fn smoothed_orthant(run: OrthantObjective, original: OrthantObjective) -> Self {
        Problem::Orthant { run, original }
    }

    pub fn logdet(obj: LogDetObjective) -> Self {
        Problem::LogDet(obj)
    }

    /// Conjugate of the original objective at the final dual.
    pub fn original_conjugate(&self, dual: &FinalDual) -> Result<f64> {
        match (self, dual) {
            (Problem::Orthant { original, .. }, FinalDual::Orthant(y)) => original.conjugate(y),
            (Problem::LogDet(obj), FinalDual::LogDet { y_mat, y }) => obj.conjugate(y_mat, *y),
            _ => Err(Error::Invalid("dual does not match the problem".into())),
        }
    }
}

/// One online step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: Vec<f64>,
    /// Cumulative point after the step; `[u]` (budget usage) for log-det.
    pub u: Vec<f64>,
    /// Dual paired with this step: `y_t` on the orthant, `(a^T Y a, y)` for
    /// log-det.
    pub dual: Vec<f64>,
    /// `A_t^T y_t`.
    pub pairing: Vec<f64>,
    /// `sigma_t(A_t^T y_t)`.
    pub support: f64,
    /// Increase of the run objective.
    pub gain: f64,
    /// `<A_t x_t, y_{t+1}>` for sequential runs, `<A_t x_t, y_t>` for
    /// simultaneous ones.
    pub next_pairing: f64,
    /// `||A_t x_t||^2`.
    pub increment_sq: f64,
    pub method: InnerMethod,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FinalDual {
    Orthant(Vec<f64>),
    LogDet { y_mat: Mat, y: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub steps: Vec<StepRecord>,
    /// Original objective at the final point.
    pub primal: f64,
    /// Run objective at the final point.
    pub primal_run: f64,
    /// Final cumulative vector; `[u]` (budget usage) for log-det.
    pub final_u: Vec<f64>,
    /// Minimal supergradient of the run objective at the final point.
    pub final_dual: FinalDual,
    pub interior_shift: Option<f64>,
    pub refactorizations: usize,
}

impl RunTrace {
    pub fn sum_support(&self) -> f64 {
        self.steps.iter().map(|s| s.support).sum()
    }

    pub fn sum_next_pairing(&self) -> f64 {
        self.steps.iter().map(|s| s.next_pairing).sum()
    }

    pub fn inner_failures(&self) -> usize {
        self.steps.iter().filter(|s| !s.converged).count()
    }
}

pub fn run_sequential(problem: &Problem, steps: &[Step]) -> Result<RunTrace> {
    run(problem, steps, Algorithm::Sequential)
}

pub fn run_simultaneous(problem: &Problem, steps: &[Step]) -> Result<RunTrace> {
    run(problem, steps, Algorithm::Simultaneous)
}

pub fn run(problem: &Problem, steps: &[Step], algorithm: Algorithm) -> Result<RunTrace> {
    for s in steps {
        s.validate()?;
    }
    match problem {
        Problem::Orthant { run, original } => run_orthant(run, original, steps, algorithm),
        Problem::LogDet(obj) => run_logdet(obj, steps, algorithm),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn needs_shift(obj: &OrthantObjective) -> bool {
    obj.as_separable().is_some_and(|s| {
        s.coords.iter().any(|c| matches!(c, Coord::Scalar(f) if f.slope_at_zero().is_infinite()))
    })
}

fn run_orthant(run: &OrthantObjective, original: &OrthantObjective, steps: &[Step], algorithm: Algorithm) -> Result<RunTrace> {
    let n = run.dim();
    if original.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: original.dim() });
    }
    for s in steps {
        if s.a.out_dim() != Some(n) {
            return Err(Error::DimensionMismatch { expected: n, found: s.a.out_dim().unwrap_or(0) });
        }
    }
    let shift = needs_shift(run).then_some(INTERIOR_SHIFT);
    let dual_at = |u: &[f64]| -> Result<Vec<f64>> {
        match shift {
            Some(s) => run.min_supergrad(&u.iter().map(|v| v + s).collect::<Vec<_>>()),
            None => run.min_supergrad(u),
        }
    };
    let mut u = vec![0.0; n];
    let mut value = run.value(&u)?;
    let mut records = Vec::with_capacity(steps.len());
    let mut y = dual_at(&u)?;
    for (t, step) in steps.iter().enumerate() {
        let rec = match algorithm {
            Algorithm::Sequential => {
                let z = step.a.transpose_apply(&y);
                let (support, x) = step.f.support(&z)?;
                let inc = step.a.apply(&x);
                u.iter_mut().zip(&inc).for_each(|(a, b)| *a += b);
                let next_value = run.value(&u)?;
                let y_next = dual_at(&u)?;
                let rec = StepRecord {
                    t,
                    u: u.clone(),
                    next_pairing: dot(&inc, &y_next),
                    increment_sq: dot(&inc, &inc),
                    x,
                    dual: core::mem::replace(&mut y, y_next),
                    pairing: z,
                    support,
                    gain: next_value - value,
                    method: InnerMethod::Support,
                    converged: true,
                };
                value = next_value;
                rec
            }
            Algorithm::Simultaneous => {
                let sol = coordinate_max(run, &u, &step.a, &step.f)?;
                let inc = step.a.apply(&sol.x);
                u.iter_mut().zip(&inc).for_each(|(a, b)| *a += b);
                let next_value = run.value(&u)?;
                y = dual_at(&u)?;
                let z = step.a.transpose_apply(&y);
                let (support, _) = step.f.support(&z)?;
                let rec = StepRecord {
                    t,
                    u: u.clone(),
                    next_pairing: dot(&inc, &y),
                    increment_sq: dot(&inc, &inc),
                    x: sol.x,
                    dual: y.clone(),
                    pairing: z,
                    support,
                    gain: next_value - value,
                    method: sol.method,
                    converged: sol.converged,
                };
                value = next_value;
                rec
            }
        };
        records.push(rec);
    }
    Ok(RunTrace {
        algorithm,
        steps: records,
        primal: original.value(&u)?,
        primal_run: value,
        final_dual: FinalDual::Orthant(dual_at(&u)?),
        final_u: u,
        interior_shift: shift,
        refactorizations: 0,
    })
}

fn run_logdet(obj: &LogDetObjective, steps: &[Step], algorithm: Algorithm) -> Result<RunTrace> {
    let n = obj.n();
    let mut state = LogDetState::new(&obj.a0)?;
    let mut records = Vec::with_capacity(steps.len());
    let kinks: Vec<f64> = match &obj.smoothed_budget {
        None => vec![obj.b],
        Some(_) => Vec::new(),
    };
    for (t, step) in steps.iter().enumerate() {
        let StepMatrix::RankOne { a } = &step.a else {
            return Err(Error::Invalid(format!("log-det step {t} must be rank one")));
        };
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len() });
        }
        if step.f.dim() != 1 {
            return Err(Error::Invalid(format!("log-det step {t} must have a one-dimensional feasible set")));
        }
        let q = state.quad(a);
        let u0 = state.u;
        let budget0 = obj.budget_value(u0);
        let norm_sq = {
            let aa = dot(a, a);
            aa * aa + 1.0
        };
        let rec = match algorithm {
            Algorithm::Sequential => {
                let y = obj.budget_slope(u0);
                let pairing = q + y;
                let x = if pairing > 0.0 { 1.0 } else { 0.0 };
                let g = state.accept(a, x)?;
                let q_next = q / (1.0 + x * q);
                let y_next = obj.budget_slope(state.u);
                StepRecord {
                    t,
                    u: vec![state.u],
                    x: vec![x],
                    dual: vec![q, y],
                    pairing: vec![pairing],
                    support: pairing.max(0.0),
                    gain: g + obj.budget_value(state.u) - budget0,
                    next_pairing: x * (q_next + y_next),
                    increment_sq: x * x * norm_sq,
                    method: InnerMethod::Support,
                    converged: true,
                }
            }
            Algorithm::Simultaneous => {
                let h = |x: f64| crate::num::ln_1p(q * x) + obj.budget_value(u0 + x);
                let local: Vec<f64> = kinks.iter().map(|b| b - u0).collect();
                let x = maximize_unit(&h, &local);
                let g = state.accept(a, x)?;
                let q_post = q / (1.0 + x * q);
                let y_post = obj.budget_slope(state.u);
                let pairing = q_post + y_post;
                StepRecord {
                    t,
                    u: vec![state.u],
                    x: vec![x],
                    dual: vec![q_post, y_post],
                    pairing: vec![pairing],
                    support: pairing.max(0.0),
                    gain: g + obj.budget_value(state.u) - budget0,
                    next_pairing: x * pairing,
                    increment_sq: x * x * norm_sq,
                    method: InnerMethod::Golden,
                    converged: true,
                }
            }
        };
        records.push(rec);
    }
    let original = obj.original();
    Ok(RunTrace {
        algorithm,
        steps: records,
        primal: original.value(&state),
        primal_run: obj.value(&state),
        final_u: vec![state.u],
        final_dual: FinalDual::LogDet { y_mat: state.y.clone(), y: obj.budget_slope(state.u) },
        interior_shift: None,
        refactorizations: state.refactorizations,
    })
}
