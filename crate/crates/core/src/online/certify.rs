use serde::{Deserialize, Serialize};

use super::engine::{Algorithm, Problem, RunTrace};
use crate::Result;

/// Which competitive bound a certificate is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum BoundRule {
    /// Simultaneous: `P >= D / beta`. Sequential: `beta P >= D + corr`,
    /// hence `P >= D / (beta + kappa)`.
    Beta { beta: f64, kappa: f64 },
    /// `1 / (1 - alpha)` with `alpha` measured at the realized final point.
    RealizedAlpha,
    /// A fixed ratio `P >= r D`.
    Ratio { r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub algorithm: Algorithm,
    /// `P`: original objective at the final point.
    pub primal: f64,
    /// `D = sum_t sigma_t(A_t^T y_t) - psi*(y_final)`.
    pub dual: f64,
    pub sum_support: f64,
    pub conjugate: f64,
    /// `P / D`, a lower bound on the competitive ratio of this run.
    pub ratio_lb: f64,
    /// `(psi*(y) - psi_run(u) + psi(u)) / psi(u)` at the final point.
    pub alpha_realized: f64,
    pub alpha_used: f64,
    pub bound: f64,
    /// `sum_t <A_t x_t, y_{t+1} - y_t>` for sequential runs, 0 otherwise.
    pub correction: f64,
    /// `psi_run(u) - psi*(y) - D - corr`, nonnegative up to rounding.
    pub identity_margin: f64,
    pub passed: bool,
}

fn tol(scale: &[f64]) -> f64 {
    1e-9 * scale.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Evaluates the dual certificate of a finished run.
pub fn certify(problem: &Problem, trace: &RunTrace, rule: BoundRule) -> Result<CertificateReport> {
    let p = trace.primal;
    let sum_support = trace.sum_support();
    let conj = problem.original_conjugate(&trace.final_dual)?;
    let d = sum_support - conj;
    let correction = match trace.algorithm {
        Algorithm::Sequential => trace.sum_next_pairing() - sum_support,
        Algorithm::Simultaneous => 0.0,
    };
    // P (1 - alpha) without dividing by P.
    let p_one_minus_alpha = trace.primal_run - conj;
    let alpha_realized = if p != 0.0 { 1.0 - p_one_minus_alpha / p } else { f64::NAN };
    let ratio_lb = if d > 0.0 { p / d } else { f64::INFINITY };
    let eps = tol(&[p, d, sum_support]);
    let seq = trace.algorithm == Algorithm::Sequential;
    let (alpha_used, bound, passed) = match rule {
        BoundRule::Beta { beta, kappa } => {
            if seq {
                let ok = beta * p >= d + correction - eps && (beta + kappa) * p >= d - eps;
                (1.0 - beta, 1.0 / (beta + kappa), ok)
            } else {
                (1.0 - beta, 1.0 / beta, beta * p >= d - eps)
            }
        }
        BoundRule::RealizedAlpha => {
            let target = d + correction;
            let bound = if d > 0.0 && p > 0.0 { target / (d * (1.0 - alpha_realized)) } else { 0.0 };
            (alpha_realized, bound, p_one_minus_alpha >= target - eps)
        }
        BoundRule::Ratio { r } => (1.0 - 1.0 / r, r, p >= r * d - eps),
    };
    Ok(CertificateReport {
        algorithm: trace.algorithm,
        primal: p,
        dual: d,
        sum_support,
        conjugate: conj,
        ratio_lb,
        alpha_realized,
        alpha_used,
        bound,
        correction,
        identity_margin: p_one_minus_alpha - d - correction,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub algorithm: Algorithm,
    /// `psi_run(u_final) - psi_run(0)`.
    pub total_gain: f64,
    pub sum_support: f64,
    pub sum_next_pairing: f64,
    /// Simultaneous: `gain - sum sigma_t`. Sequential:
    /// `gain - sum <A_t x_t, y_{t+1}>`.
    pub margin: f64,
    /// Sequential with `mu`: `gain - sum sigma_t + sum ||A_t x_t||^2 / (2 mu)`.
    pub regret_margin: Option<f64>,
    pub passed: bool,
}

/// Checks the per-run duality-gap lemma on the run objective. `mu` is the
/// inverse Lipschitz constant of its gradient, when it has one.
pub fn duality_gap_diagnostics(trace: &RunTrace, mu: Option<f64>) -> LemmaReport {
    let total_gain: f64 = trace.steps.iter().map(|s| s.gain).sum();
    let sum_support = trace.sum_support();
    let sum_next = trace.sum_next_pairing();
    let eps = tol(&[total_gain, sum_support]);
    let (margin, regret_margin) = match trace.algorithm {
        Algorithm::Simultaneous => (total_gain - sum_support, None),
        Algorithm::Sequential => {
            let regret = mu.map(|m| {
                let sq: f64 = trace.steps.iter().map(|s| s.increment_sq).sum();
                total_gain - sum_support + sq / (2.0 * m)
            });
            (total_gain - sum_next, regret)
        }
    };
    let passed = margin >= -eps && regret_margin.is_none_or(|r| r >= -eps);
    LemmaReport {
        algorithm: trace.algorithm,
        total_gain,
        sum_support,
        sum_next_pairing: sum_next,
        margin,
        regret_margin,
        passed,
    }
}
