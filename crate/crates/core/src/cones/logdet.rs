use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::linalg::{inverse_spd, logdet_spd, sym_eigenvalues, Mat};
use crate::num;
use crate::scalar::ScalarConcave;
use crate::smoothing::SmoothedScalar;
use crate::{Error, Result};

/// `psi(U, u) = logdet(A0 + U) - logdet(A0) - l (u - b)_+`, optionally with
/// the budget penalty replaced by a smoothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogDetObjective {
    pub a0: Mat,
    pub b: f64,
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothed_budget: Option<SmoothedScalar>,
}

impl LogDetObjective {
    pub fn new(a0: Mat, b: f64, l: f64) -> Result<Self> {
        let obj = Self { a0, b, l, smoothed_budget: None };
        obj.validate()?;
        Ok(obj)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::Invalid(format!("budget b = {} must be positive", self.b)));
        }
        let lam = self.lambda_min()?;
        if !(self.l > 2.0 / lam) {
            return Err(Error::Invalid(format!("l = {} must exceed 2 / lambda_min(A0) = {}", self.l, 2.0 / lam)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a0.n
    }

    pub fn lambda_min(&self) -> Result<f64> {
        let lam = sym_eigenvalues(&self.a0)[0];
        if lam > 0.0 {
            Ok(lam)
        } else {
            Err(Error::NotPositiveDefinite)
        }
    }

    pub fn with_smoothing(mut self, s: SmoothedScalar) -> Self {
        self.smoothed_budget = Some(s);
        self
    }

    /// The unsmoothed objective.
    pub fn original(&self) -> Self {
        Self { smoothed_budget: None, ..self.clone() }
    }

    pub fn penalty(&self) -> ScalarConcave {
        ScalarConcave::NegPlusPenalty { l: self.l, b: self.b }
    }

    pub fn budget_value(&self, u: f64) -> f64 {
        match &self.smoothed_budget {
            Some(s) => s.value(u),
            None => self.penalty().value(u),
        }
    }

    /// Smallest supergradient of the budget term.
    pub fn budget_slope(&self, u: f64) -> f64 {
        match &self.smoothed_budget {
            Some(s) => s.slope(u),
            None => self.penalty().supergrad(u).lo,
        }
    }

    pub fn value(&self, state: &LogDetState) -> f64 {
        state.gain + self.budget_value(state.u)
    }

    /// `psi*(Y, y) = n - tr(Y A0) + logdet Y + logdet A0 + G*(y)` for the
    /// unsmoothed objective, valid for `0 < Y <= A0^{-1}`.
    pub fn conjugate(&self, y_mat: &Mat, y: f64) -> Result<f64> {
        let g = self.penalty().conjugate(y);
        if g == f64::NEG_INFINITY {
            return Ok(g);
        }
        let n = self.n() as f64;
        Ok(n - y_mat.trace_product(&self.a0) + logdet_spd(y_mat)? + logdet_spd(&self.a0)? + g)
    }
}

/// `log(1 + a^T Y a x)`: the exact increase of `logdet` from a rank-one
/// update when `Y` is the current inverse.
pub fn logdet_step_gain(y: &Mat, a: &[f64], x: f64) -> f64 {
    num::ln_1p(y.quad(a) * x)
}

/// Updates between forced refactorizations.
pub const REFACTOR_EVERY: usize = 128;
/// Updates between drift checks.
pub const DRIFT_CHECK_EVERY: usize = 32;
pub const DRIFT_TOL: f64 = 1e-6;

/// Running state `M = A0 + sum a a^T x`, its inverse `Y`, the accumulated
/// `logdet(M) - logdet(A0)`, and the budget usage `u = sum x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogDetState {
    pub m: Mat,
    pub y: Mat,
    pub gain: f64,
    pub u: f64,
    updates: usize,
    pub refactorizations: usize,
}

impl LogDetState {
    pub fn new(a0: &Mat) -> Result<Self> {
        Ok(Self { m: a0.clone(), y: inverse_spd(a0)?, gain: 0.0, u: 0.0, updates: 0, refactorizations: 0 })
    }

    /// `a^T Y a`.
    pub fn quad(&self, a: &[f64]) -> f64 {
        self.y.quad(a)
    }

    /// `||Y M - I||_inf`.
    pub fn drift(&self) -> f64 {
        self.y.matmul(&self.m).max_abs_diff_identity()
    }

    /// Adds `a a^T x` with a Sherman-Morrison update of `Y`.
    pub fn accept(&mut self, a: &[f64], x: f64) -> Result<f64> {
        if x == 0.0 {
            self.u += x;
            return Ok(0.0);
        }
        let ya = self.y.matvec(a);
        let q: f64 = ya.iter().zip(a).map(|(p, r)| p * r).sum();
        let denom = 1.0 + x * q;
        if !(denom > 0.0) || !(q >= -1e-12) {
            return Err(Error::NotPositiveDefinite);
        }
        let gain = num::ln_1p(x * q);
        self.m.add_outer(a, x);
        self.y.add_outer(&ya, -x / denom);
        self.gain += gain;
        self.u += x;
        self.updates += 1;
        let due = self.updates % REFACTOR_EVERY == 0;
        if due || (self.updates % DRIFT_CHECK_EVERY == 0 && self.drift() > DRIFT_TOL) {
            self.refactor()?;
        }
        Ok(gain)
    }

    pub fn refactor(&mut self) -> Result<()> {
        self.m.symmetrize();
        self.y = inverse_spd(&self.m)?;
        self.refactorizations += 1;
        Ok(())
    }
}

/// Samples PSD pairs `U >= V` and reports the worst violation of
/// `grad psi(V) - grad psi(U) >= 0` for `grad psi(U) = (A0 + U)^{-1}`.
pub fn logdet_antitone_violation(a0: &Mat, pairs: &[(Mat, Mat)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (u, v) in pairs {
        let mut mu = a0.clone();
        let mut mv = a0.clone();
        for k in 0..a0.data.len() {
            mu.data[k] += u.data[k];
            mv.data[k] += v.data[k];
        }
        let gu = inverse_spd(&mu)?;
        let gv = inverse_spd(&mv)?;
        let mut diff = gv.clone();
        for k in 0..diff.data.len() {
            diff.data[k] -= gu.data[k];
        }
        let lam = sym_eigenvalues(&diff)[0];
        worst = worst.max(-lam);
    }
    Ok(worst)
}

/// Builds `A0 = L0 + 1 1^T` from an edge list on `n` vertices.
pub fn graph_base_matrix(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut a0 = Mat::zeros(n);
    for &(i, j) in edges {
        let v = incidence(n, i, j);
        a0.add_outer(&v, 1.0);
    }
    for i in 0..n {
        for j in 0..n {
            a0[(i, j)] += 1.0;
        }
    }
    a0
}

/// Incidence vector `e_i - e_j`.
pub fn incidence(n: usize, i: usize, j: usize) -> Vec<f64> {
    let mut v = alloc::vec![0.0; n];
    v[i] = 1.0;
    v[j] = -1.0;
    v
}
