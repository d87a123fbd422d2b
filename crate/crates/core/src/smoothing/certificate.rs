use crate::num::{self, E};
use crate::scalar::ScalarConcave;

/// Residuals of the optimality conditions for the adwords smoothing
/// `y(u) = ((e - e^u)/(e - 1))_+` with dual density `f(u) = e^{1-u}/(e - 1)`
/// and `beta = e/(e - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdwordsCertificate {
    /// `int_0^inf f psi du`, should be 1.
    pub normalization: f64,
    /// Smallest sampled `f(u)`.
    pub min_density: f64,
    /// `max_u dist(int_u^inf f, f(u) d psi*(y(u)))`.
    pub stationarity: f64,
    /// `max_u int_0^u y - psi*(y(u)) - beta psi(u)`.
    pub primal: f64,
    /// `max_u |f(u) (int_0^u y - psi*(y(u)) - beta psi(u))|`.
    pub slackness: f64,
}

impl AdwordsCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        (self.normalization - 1.0).abs() <= tol
            && self.min_density >= 0.0
            && self.stationarity <= tol
            && self.primal <= tol
            && self.slackness <= tol
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Checks the four optimality conditions by quadrature; the integrals to
/// infinity are truncated at `u = 60` where `f` is below `e^-59`.
pub fn adwords_certificate_check() -> AdwordsCertificate {
    let cap = ScalarConcave::cap();
    let beta = E / (E - 1.0);
    let f = |u: f64| num::exp(1.0 - u) / (E - 1.0);
    let y = |u: f64| num::pos((E - num::exp(u)) / (E - 1.0));
    let end = 60.0;
    let n = 4000;
    let int_y = |u: f64| simpson(y, 0.0, u.min(1.0), n);
    let tail_f = |u: f64| {
        if u < 1.0 {
            simpson(f, u, 1.0, n) + simpson(f, 1.0, end, 20 * n)
        } else {
            simpson(f, u, end, 20 * n)
        }
    };

    let normalization = simpson(|u| f(u) * cap.value(u), 0.0, 1.0, n) + simpson(f, 1.0, end, 20 * n);
    let mut cert = AdwordsCertificate { normalization, min_density: f64::INFINITY, stationarity: 0.0, primal: f64::NEG_INFINITY, slackness: 0.0 };
    for k in 0..=400 {
        let u = k as f64 * 0.01;
        let fu = f(u);
        let yu = y(u);
        cert.min_density = cert.min_density.min(fu);
        // The superdifferential of psi* at y in (0, 1] is {1}; at y = 0 it is [1, inf).
        let target = tail_f(u);
        let gap = if yu > 0.0 { (target - fu).abs() } else { num::pos(fu - target) };
        cert.stationarity = cert.stationarity.max(gap);
        let resid = int_y(u) - cap.conjugate(yu) - beta * cap.value(u);
        cert.primal = cert.primal.max(resid);
        cert.slackness = cert.slackness.max((fu * resid).abs());
    }
    cert
}
