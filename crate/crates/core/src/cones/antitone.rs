use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::Mat;
use super::logdet::{logdet_antitone_violation, LogDetObjective};
use super::objective::OrthantObjective;
use crate::Result;

/// Violations up to this size are attributed to rounding.
pub const ANTITONE_TOL: f64 = 1e-8;

/// Outcome of sampling ordered pairs `u >= v` and comparing supergradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntitoneReport {
    pub trials: usize,
    pub max_violation: f64,
    pub passed: bool,
}

impl AntitoneReport {
    fn from_violation(trials: usize, max_violation: f64) -> Self {
        Self { trials, max_violation, passed: max_violation <= ANTITONE_TOL }
    }
}

/// Coordinates drawn from `[0, 3]`, snapped to an integer a fifth of the
/// time so kinks get exercised.
fn sample_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let v: f64 = rng.gen_range(0.0..3.0);
            if rng.gen_bool(0.2) {
                libm::round(v)
            } else {
                v
            }
        })
        .collect()
}

fn sample_pair(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let v = sample_point(rng, dim);
    let u = v
        .iter()
        .map(|&vi| if rng.gen_bool(0.3) { vi } else { vi + rng.gen_range(0.0..2.0) })
        .collect();
    (u, v)
}

/// Checks `grad(u) <= grad(v)` coordinatewise for sampled `u >= v`, with a
/// caller-supplied selection of the gradient.
pub fn antitone_check_fn(dim: usize, grad: &dyn Fn(&[f64]) -> Vec<f64>, trials: usize, seed: u64) -> AntitoneReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (u, v) = sample_pair(&mut rng, dim);
        let (gu, gv) = (grad(&u), grad(&v));
        for (a, b) in gu.iter().zip(&gv) {
            worst = worst.max(a - b);
        }
    }
    AntitoneReport::from_violation(trials, worst)
}

/// Assumption 1 on the orthant: the smallest supergradient at `u` lies
/// below the whole superdifferential at `v <= u`.
pub fn antitone_check(obj: &OrthantObjective, trials: usize, seed: u64) -> Result<AntitoneReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (u, v) = sample_pair(&mut rng, obj.dim());
        let gu = obj.min_supergrad(&u)?;
        let gv = obj.min_supergrad(&v)?;
        for (a, b) in gu.iter().zip(&gv) {
            worst = worst.max(a - b);
        }
    }
    Ok(AntitoneReport::from_violation(trials, worst))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Mat {
    let mut m = Mat::zeros(n);
    for _ in 0..rank {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        m.add_outer(&a, rng.gen_range(0.0..2.0));
    }
    m
}

/// Assumption 1 on the PSD cone for the log-det part: samples `U = V + W`
/// with random PSD `V, W` and checks `(A0 + V)^{-1} - (A0 + U)^{-1} >= 0`.
/// The budget part is a scalar concave penalty and is checked on the axis.
pub fn antitone_check_logdet(obj: &LogDetObjective, trials: usize, seed: u64) -> Result<AntitoneReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = obj.n();
    let mut pairs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let v = random_psd(&mut rng, n, 1 + n / 2);
        let w = random_psd(&mut rng, n, 1 + n / 2);
        let mut u = v.clone();
        for k in 0..u.data.len() {
            u.data[k] += w.data[k];
        }
        pairs.push((u, v));
    }
    let mut worst = logdet_antitone_violation(&obj.a0, &pairs)?;
    for _ in 0..trials {
        let (u, v) = sample_pair(&mut rng, 1);
        let (u, v) = (u[0] * obj.b, v[0] * obj.b);
        worst = worst.max(obj.budget_slope(u) - obj.budget_slope(v));
    }
    Ok(AntitoneReport::from_violation(trials, worst))
}
