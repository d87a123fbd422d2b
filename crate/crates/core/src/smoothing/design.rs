use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::smoothed::{make_monotone, SmoothedScalar, TailMode};
use super::verify::{verify_beta, VERIFY_FACTOR};
use crate::num;
use crate::scalar::{ScalarConcave, DEFAULT_ALPHA_GRID};
use crate::{Error, Result};

/// Which constraint family the designer solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Simultaneous,
    /// Adds `c (psi'(0) - y(u))` to each constraint.
    Sequential { c: f64 },
}

impl Variant {
    pub fn c(&self) -> Option<f64> {
        match self {
            Variant::Simultaneous => None,
            Variant::Sequential { c } => Some(*c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub base: ScalarConcave,
    /// Plateau point (zero tail) or truncation horizon.
    pub horizon: f64,
    pub d: usize,
    pub tail: TailMode,
    pub variant: Variant,
    pub beta_tol: f64,
    pub feas_tol: f64,
    /// Fixed bisection bracket; by default `[1, 1 - alpha_bar]`, widened
    /// until feasible.
    pub beta_bracket: Option<(f64, f64)>,
}

impl DesignSpec {
    /// Simultaneous design on `[0, horizon]`. The tail is zero when the base
    /// is flat from `horizon` on, and held otherwise.
    pub fn new(base: ScalarConcave, horizon: f64, d: usize) -> Self {
        let flat = base.is_monotone() && base.supergrad(horizon).lo == 0.0 && horizon.is_finite();
        let tail = if flat { TailMode::Zero } else { TailMode::HoldLast };
        Self { base, horizon, d, tail, variant: Variant::Simultaneous, beta_tol: 1e-7, feas_tol: 1e-6, beta_bracket: None }
    }

    pub fn sequential(mut self, c: f64) -> Self {
        self.variant = Variant::Sequential { c };
        self
    }

    pub fn with_tail(mut self, tail: TailMode) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.beta_bracket = Some((lo, hi));
        self
    }

    pub fn with_beta_tol(mut self, tol: f64) -> Self {
        self.beta_tol = tol;
        self
    }

    pub fn h(&self) -> f64 {
        self.horizon / self.d as f64
    }

    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.d < 10 {
            return Err(Error::Invalid(format!("grid count d = {} must be at least 10", self.d)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Invalid(format!("horizon {} must be positive and finite", self.horizon)));
        }
        if !(self.beta_tol > 0.0 && self.feas_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if !self.base.is_monotone() {
            return Err(Error::Invalid("the designer needs a monotone base".into()));
        }
        if let Variant::Sequential { c } = self.variant {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Invalid(format!("c = {c} must be non-negative")));
            }
            if !self.base.slope_at_zero().is_finite() {
                return Err(Error::Invalid("sequential design needs a finite slope at 0".into()));
            }
        }
        if self.tail == TailMode::Zero && self.base.supergrad(self.horizon).lo != 0.0 {
            return Err(Error::Invalid(format!("base is not flat from u = {}, a zero tail does not apply", self.horizon)));
        }
        let h = self.h();
        if let Some(t) = (1..=self.d).find(|&t| !(self.base.value(t as f64 * h) > 0.0)) {
            let u = t as f64 * h;
            return Err(Error::UndefinedRatio { u, value: self.base.value(u) });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub smoothed: SmoothedScalar,
    /// Certified `beta = 1 - alpha_bar(psi, psi_S)`.
    pub beta: f64,
    /// Largest constraint residual at `beta` on the verification grid.
    pub max_residual: f64,
    pub certified: bool,
    /// Bisection endpoint before verification.
    pub beta_bisect: f64,
    /// Sup found by the verifier.
    pub verify_sup: f64,
    pub variant: Variant,
}

impl DesignResult {
    pub fn ratio(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn alpha_bar(&self) -> f64 {
        1.0 - self.beta
    }
}

const ROOT_TOL: f64 = 1e-12;

/// Golden-section minimizer of a convex function on `[a, b]`.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (num::sqrt(5.0) - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > ROOT_TOL * b.abs().max(1.0) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Smallest `y` in `[lo, hi]` with `g(y) <= 0`, for convex `g`.
fn leftmost_root(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    let mut right = hi;
    if !(g(hi) <= 0.0) {
        right = golden_min(g, lo, hi);
        if !(g(right) <= 0.0) {
            return None;
        }
    }
    if g(lo) <= 0.0 {
        return Some(lo);
    }
    let mut left = lo;
    while right - left > ROOT_TOL {
        let mid = 0.5 * (left + right);
        if g(mid) <= 0.0 {
            right = mid;
        } else {
            left = mid;
        }
    }
    Some(right)
}

/// Constraint points per design cell, twice the verification density.
const CELL_CHECKS: usize = 2 * VERIFY_FACTOR;

struct Greedy<'a> {
    spec: &'a DesignSpec,
    h: f64,
    c: f64,
    slope0: f64,
    /// Length of the initial linear piece of the base.
    piece0: f64,
}

impl Greedy<'_> {
    fn new(spec: &DesignSpec) -> Greedy<'_> {
        let slope0 = spec.base.slope_at_zero();
        let piece0 = if slope0.is_finite() { spec.base.level_set(slope0).1 } else { 0.0 };
        Greedy { spec, h: spec.h(), c: spec.variant.c().unwrap_or(0.0), slope0, piece0 }
    }

    fn slack(&self, target: f64) -> f64 {
        1e-13 * (1.0 + target.abs())
    }

    /// Lower bound on `y[1]` from the right limit of the constraint at
    /// `u = 0`: `y(0) - y'(0+) (c + piece0) <= beta psi'(0)`.
    fn first_step_floor(&self, beta: f64) -> f64 {
        let w = self.c + self.piece0;
        if !self.slope0.is_finite() || w <= 0.0 {
            return 0.0;
        }
        if w.is_infinite() {
            return self.slope0;
        }
        (self.slope0 - (beta - 1.0) * self.h * self.slope0 / w).max(0.0)
    }

    /// Worst constraint violation over `CELL_CHECKS` points of the cell
    /// `[(t-1) h, t h]`, when the samples move from `prev` to `v` and
    /// `cum` is the integral up to the left end.
    fn cell_excess(&self, beta: f64, t: usize, cum: f64, prev: f64, v: f64) -> f64 {
        let base = &self.spec.base;
        let h = self.h;
        let mut worst = f64::NEG_INFINITY;
        for i in 1..=CELL_CHECKS {
            let tau = i as f64 / CELL_CHECKS as f64;
            let u = (t as f64 - 1.0 + tau) * h;
            let target = beta * base.value(u);
            let y = prev + tau * (v - prev);
            let value = cum + h * (tau * prev + 0.5 * tau * tau * (v - prev));
            let seq = if self.c != 0.0 { self.c * (self.slope0 - y) } else { 0.0 };
            worst = worst.max(value + seq - base.conjugate(y) - target - self.slack(target));
        }
        worst
    }

    /// Forward construction of the smallest feasible derivative samples.
    fn run(&self, beta: f64) -> Option<Vec<f64>> {
        let base = &self.spec.base;
        let d = self.spec.d;
        let h = self.h;
        let mut y = Vec::with_capacity(d + 1);
        let mut cum = 0.0;
        if self.slope0.is_finite() {
            y.push(self.slope0);
        } else {
            // y(0) = y(h): the first cell has constant slope.
            let target = beta * base.value(h);
            let slack = self.slack(target);
            let g = |v: f64| h * v - base.conjugate(v) - target - slack;
            let hi = base.supergrad(h).hi;
            let v = leftmost_root(&g, 0.0, hi)?;
            y.push(v);
            y.push(v);
            cum = h * v;
        }
        while y.len() <= d {
            let t = y.len();
            let prev = y[t - 1];
            let g = |v: f64| self.cell_excess(beta, t, cum, prev, v);
            let floor = if t == 1 { self.first_step_floor(beta) } else { 0.0 };
            if floor > prev {
                return None;
            }
            let v = leftmost_root(&g, floor, prev)?;
            cum += 0.5 * h * (prev + v);
            y.push(v);
        }
        if self.spec.tail == TailMode::Zero && y[d] != 0.0 {
            return None;
        }
        Some(y)
    }
}

/// Derivative levels used by the lattice search.
pub const LATTICE_LEVELS: usize = 2000;

/// Feasibility over derivative samples restricted to a uniform lattice on
/// `[0, psi'(0)]`. A backward-free dynamic program: for each level it keeps
/// the smallest integral that reaches it, which dominates every other
/// prefix ending there.
struct Lattice<'a> {
    g: &'a Greedy<'a>,
    levels: Vec<f64>,
    conj: Vec<f64>,
}

impl<'a> Lattice<'a> {
    fn new(g: &'a Greedy<'a>, count: usize) -> Self {
        let top = g.slope0;
        let levels: Vec<f64> = (0..count).map(|j| top * j as f64 / (count - 1) as f64).collect();
        let conj = levels.iter().map(|&v| g.spec.base.conjugate(v)).collect();
        Self { g, levels, conj }
    }

    fn run(&self, beta: f64, want_path: bool) -> Option<Vec<f64>> {
        let (spec, h, c, y0) = (self.g.spec, self.g.h, self.g.c, self.g.slope0);
        let n = self.levels.len();
        let inf = f64::INFINITY;
        let mut best = alloc::vec![inf; n];
        let mut next = alloc::vec![inf; n];
        best[n - 1] = 0.0;
        let mut parents: Vec<u32> = if want_path { alloc::vec![0; spec.d * n] } else { Vec::new() };
        let mut suffix = alloc::vec![(inf, 0u32); n + 1];
        let floor = self.g.first_step_floor(beta);
        for t in 1..=spec.d {
            let target = beta * spec.base.value(t as f64 * h);
            let slack = self.g.slack(target);
            for j in (0..n).rev() {
                let v = best[j] + 0.5 * h * self.levels[j];
                suffix[j] = if v < suffix[j + 1].0 { (v, j as u32) } else { suffix[j + 1] };
            }
            let last = t == spec.d && spec.tail == TailMode::Zero;
            let mut any = false;
            for k in 0..n {
                let lv = self.levels[k];
                next[k] = inf;
                if (t == 1 && lv < floor) || (last && k != 0) {
                    continue;
                }
                let (s, arg) = suffix[k];
                let cum = s + 0.5 * h * lv;
                if cum + c * (y0 - lv) - self.conj[k] <= target + slack {
                    let j = arg as usize;
                    let prev = self.levels[j];
                    if self.g.cell_excess(beta, t, best[j], prev, lv) > 0.0 {
                        continue;
                    }
                    next[k] = cum;
                    any = true;
                    if want_path {
                        parents[(t - 1) * n + k] = arg;
                    }
                }
            }
            if !any {
                return None;
            }
            core::mem::swap(&mut best, &mut next);
        }
        if !want_path {
            return Some(Vec::new());
        }
        let mut k = (0..n).filter(|&k| best[k].is_finite()).min_by(|&a, &b| best[a].total_cmp(&best[b]))?;
        let mut y = alloc::vec![0.0; spec.d + 1];
        for t in (1..=spec.d).rev() {
            y[t] = self.levels[k];
            k = parents[(t - 1) * n + k] as usize;
        }
        y[0] = self.levels[k];
        Some(y)
    }
}

fn certify_samples(spec: &DesignSpec, y: &[f64], beta_bisect: f64) -> Result<DesignResult> {
    let y = make_monotone(y);
    let smoothed = SmoothedScalar::new(spec.h(), y, spec.tail)?;
    let report = verify_beta(&smoothed, &spec.base, spec.variant.c());
    if !report.sup_beta.is_finite() {
        return Err(Error::InfeasibleDesign(format!(
            "verification failed at u = {} (sup = {})",
            report.argmax_u, report.sup_beta
        )));
    }
    let beta = beta_bisect.max(report.sup_beta);
    let max_residual = report.max_residual(beta);
    Ok(DesignResult {
        smoothed,
        beta,
        max_residual,
        certified: max_residual <= spec.feas_tol,
        beta_bisect,
        verify_sup: report.sup_beta,
        variant: spec.variant,
    })
}

fn bisect(lo: f64, hi: f64, tol: f64, feasible: &dyn Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Optimal smoothing by bisection on `beta`. Two feasibility oracles are
/// tried: a greedy forward construction taking the smallest admissible
/// sample at each grid point, and (for a finite slope at 0) a search over a
/// derivative lattice that can keep slack for later constraints. Each
/// candidate is verified at 4x resolution and the smaller certified `beta`
/// wins.
pub fn design_optimal(spec: &DesignSpec) -> Result<DesignResult> {
    spec.validate()?;
    let greedy = Greedy::new(spec);

    let (lo, hi) = if greedy.run(1.0).is_some() {
        (1.0, 1.0)
    } else {
        let (lo, mut hi) = match spec.beta_bracket {
            Some(b) => b,
            None => {
                let alpha = spec.base.alpha_bar(spec.horizon, DEFAULT_ALPHA_GRID)?;
                (1.0, (1.0 - alpha).max(1.0) * (1.0 + 1e-9) + greedy.c)
            }
        };
        let mut doublings = 0;
        while greedy.run(hi).is_none() {
            doublings += 1;
            if doublings > 40 {
                return Err(Error::InfeasibleDesign(format!("no feasible smoothing found up to beta = {hi}")));
            }
            hi *= 2.0;
        }
        (lo, hi)
    };
    let hi = bisect(lo, hi, spec.beta_tol, &|b| greedy.run(b).is_some());
    let y = greedy.run(hi).expect("bisection keeps a feasible endpoint");
    let mut result = certify_samples(spec, &y, hi)?;

    if greedy.slope0.is_finite() && result.beta > 1.0 {
        let lattice = Lattice::new(&greedy, LATTICE_LEVELS);
        let top = result.beta;
        if lattice.run(top, false).is_some() {
            let b = bisect(lo.min(top), top, spec.beta_tol, &|b| lattice.run(b, false).is_some());
            if let Some(y) = lattice.run(b, true) {
                let alt = certify_samples(spec, &y, b)?;
                if alt.certified && alt.beta < result.beta {
                    result = alt;
                }
            }
        }
    }
    Ok(result)
}

/// [`design_optimal`] for a spec that must carry the sequential variant.
pub fn design_sequential(spec: &DesignSpec) -> Result<DesignResult> {
    match spec.variant {
        Variant::Sequential { .. } => design_optimal(spec),
        Variant::Simultaneous => Err(Error::Invalid("design_sequential needs a sequential variant".into())),
    }
}
