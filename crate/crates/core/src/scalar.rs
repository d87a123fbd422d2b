//! One-dimensional concave functions on `[0, inf)` with exact calculus.
//!
//! Every catalog member satisfies `value(0) = 0`. The conjugate is the
//! concave conjugate restricted to the domain, `f*(y) = inf_{u >= 0} y u - f(u)`,
//! and is returned in closed form (`-inf` outside its domain).

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::num::{self, near};
use crate::{Error, Result};

/// Slope reported in place of `+inf` at the boundary `u = 0`.
pub const DEFAULT_SLOPE_CAP: f64 = 1e12;

/// Default number of points in the `alpha_bar` grid.
pub const DEFAULT_ALPHA_GRID: usize = 10_000;

/// Closed interval of supergradients `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupergradInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SupergradInterval {
    pub fn point(y: f64) -> Self {
        Self { lo: y, hi: y }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// Catalog of scalar concave functions.
///
/// Serialized as `{"kind": "...", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ScalarConcave {
    /// `scale * min(u, 1)`.
    Cap { scale: f64 },
    /// Integral of a non-increasing step slope: slope `slopes[i]` on
    /// `[breakpoints[i], breakpoints[i + 1])`, the last slope to infinity.
    /// `breakpoints[0]` must be 0.
    PiecewiseLinear { breakpoints: Vec<f64>, slopes: Vec<f64> },
    /// `ln(1 + u)`.
    Log1p {},
    /// `sqrt(u)`.
    Sqrt {},
    /// `u^p` with `0 < p < 1`.
    Power { p: f64 },
    /// `slope * u`.
    Linear { slope: f64 },
    /// `-l * (u - b)_+`.
    NegPlusPenalty { l: f64, b: f64 },
}

/// Pieces of a piecewise-linear concave function written as
/// `s0 * u - sum_j l_j (u - b_j)_+` with every `l_j > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HingeForm {
    pub s0: f64,
    pub hinges: Vec<(f64, f64)>,
}

impl ScalarConcave {
    pub fn cap() -> Self {
        ScalarConcave::Cap { scale: 1.0 }
    }

    pub fn log1p() -> Self {
        ScalarConcave::Log1p {}
    }

    pub fn sqrt() -> Self {
        ScalarConcave::Sqrt {}
    }

    pub fn linear(slope: f64) -> Self {
        ScalarConcave::Linear { slope }
    }

    pub fn power(p: f64) -> Result<Self> {
        let f = ScalarConcave::Power { p };
        f.validate()?;
        Ok(f)
    }

    pub fn penalty(l: f64, b: f64) -> Result<Self> {
        let f = ScalarConcave::NegPlusPenalty { l, b };
        f.validate()?;
        Ok(f)
    }

    /// Builds a piecewise-linear member; consecutive equal slopes are merged.
    pub fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != slopes.len() || breakpoints.is_empty() {
            return Err(Error::Invalid(format!(
                "piecewise_linear needs equally many breakpoints and slopes (got {} and {})",
                breakpoints.len(),
                slopes.len()
            )));
        }
        let mut bp = Vec::with_capacity(breakpoints.len());
        let mut sl: Vec<f64> = Vec::with_capacity(slopes.len());
        for (b, s) in breakpoints.into_iter().zip(slopes) {
            if sl.last() == Some(&s) {
                continue;
            }
            bp.push(b);
            sl.push(s);
        }
        let f = ScalarConcave::PiecewiseLinear { breakpoints: bp, slopes: sl };
        f.validate()?;
        Ok(f)
    }

    /// The function `min(0.75, u, 0.5 u + 0.25)` used as a running example.
    pub fn three_piece() -> Self {
        ScalarConcave::PiecewiseLinear { breakpoints: alloc::vec![0.0, 0.5, 1.0], slopes: alloc::vec![1.0, 0.5, 0.0] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.into()));
        match self {
            ScalarConcave::Cap { scale } if !(*scale > 0.0 && scale.is_finite()) => bad("cap scale must be positive"),
            ScalarConcave::Power { p } if !(*p > 0.0 && *p < 1.0) => bad("power exponent must lie in (0, 1)"),
            ScalarConcave::Linear { slope } if !slope.is_finite() => bad("linear slope must be finite"),
            ScalarConcave::NegPlusPenalty { l, b } if !(*l > 0.0 && *b >= 0.0) => bad("penalty needs l > 0 and b >= 0"),
            ScalarConcave::PiecewiseLinear { breakpoints, slopes } => {
                if breakpoints.len() != slopes.len() || breakpoints.is_empty() {
                    return bad("piecewise_linear needs equally many breakpoints and slopes");
                }
                if breakpoints[0] != 0.0 {
                    return bad("first breakpoint must be 0");
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("breakpoints must be strictly increasing");
                }
                if slopes.windows(2).any(|w| w[1] > w[0]) {
                    return bad("slopes must be non-increasing (concavity)");
                }
                if slopes.iter().chain(breakpoints).any(|v| !v.is_finite()) {
                    return bad("breakpoints and slopes must be finite");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `true` when every supergradient is nonnegative.
    pub fn is_monotone(&self) -> bool {
        match self {
            ScalarConcave::PiecewiseLinear { slopes, .. } => slopes.last().is_some_and(|s| *s >= 0.0),
            ScalarConcave::Linear { slope } => *slope >= 0.0,
            ScalarConcave::NegPlusPenalty { .. } => false,
            _ => true,
        }
    }

    /// Checked evaluation; negative `u` is rejected.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("u = {u} is outside [0, inf)")));
        }
        Ok(self.value(u))
    }

    /// Evaluation for `u >= 0` (negative input is clamped to 0).
    pub fn value(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        match self {
            ScalarConcave::Cap { scale } => scale * u.min(1.0),
            ScalarConcave::PiecewiseLinear { breakpoints, slopes } => {
                let mut acc = 0.0;
                for i in 0..slopes.len() {
                    let a = breakpoints[i];
                    if u <= a {
                        break;
                    }
                    let b = breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    acc += slopes[i] * (u.min(b) - a);
                }
                acc
            }
            ScalarConcave::Log1p {} => num::ln_1p(u),
            ScalarConcave::Sqrt {} => num::sqrt(u),
            ScalarConcave::Power { p } => num::powf(u, *p),
            ScalarConcave::Linear { slope } => slope * u,
            ScalarConcave::NegPlusPenalty { l, b } => -l * num::pos(u - b),
        }
    }

    /// Concave conjugate `inf_{u >= 0} y u - f(u)`; `-inf` outside the domain.
    pub fn conjugate(&self, y: f64) -> f64 {
        let ninf = f64::NEG_INFINITY;
        match self {
            ScalarConcave::Cap { scale } => {
                if y < 0.0 {
                    ninf
                } else if y <= *scale {
                    y - scale
                } else {
                    0.0
                }
            }
            ScalarConcave::PiecewiseLinear { breakpoints, slopes } => {
                let last = *slopes.last().expect("validated");
                if y < last {
                    return ninf;
                }
                // y u - f(u) is convex piecewise linear with kinks at the
                // breakpoints, bounded below since y >= last slope.
                breakpoints.iter().map(|&b| y * b - self.value(b)).fold(f64::INFINITY, f64::min)
            }
            ScalarConcave::Log1p {} => {
                if y <= 0.0 {
                    ninf
                } else if y >= 1.0 {
                    0.0
                } else {
                    1.0 - y + num::ln(y)
                }
            }
            ScalarConcave::Sqrt {} => {
                if y <= 0.0 {
                    ninf
                } else {
                    -0.25 / y
                }
            }
            ScalarConcave::Power { p } => {
                if y <= 0.0 {
                    ninf
                } else {
                    let u = num::powf(y / p, 1.0 / (p - 1.0));
                    (p - 1.0) * num::powf(u, *p)
                }
            }
            ScalarConcave::Linear { slope } => {
                if y >= *slope {
                    0.0
                } else {
                    ninf
                }
            }
            ScalarConcave::NegPlusPenalty { l, b } => {
                if y < -l {
                    ninf
                } else {
                    (y * b).min(0.0)
                }
            }
        }
    }

    /// Supergradient interval with the default boundary slope cap.
    pub fn supergrad(&self, u: f64) -> SupergradInterval {
        self.supergrad_capped(u, DEFAULT_SLOPE_CAP)
    }

    /// Supergradient interval; at `u = 0` the interval is the right
    /// derivative (with `slope_cap` standing in for an infinite one).
    /// Points within a relative 1e-9 of a kink are treated as the kink.
    pub fn supergrad_capped(&self, u: f64, slope_cap: f64) -> SupergradInterval {
        let u = u.max(0.0);
        match self {
            ScalarConcave::Cap { scale } => {
                if near(u, 1.0) {
                    SupergradInterval::new(0.0, *scale)
                } else if u < 1.0 {
                    SupergradInterval::point(*scale)
                } else {
                    SupergradInterval::point(0.0)
                }
            }
            ScalarConcave::PiecewiseLinear { breakpoints, slopes } => {
                for i in 1..breakpoints.len() {
                    let b = breakpoints[i];
                    if near(u, b) {
                        return SupergradInterval::new(slopes[i], slopes[i - 1]);
                    }
                    if u < b {
                        return SupergradInterval::point(slopes[i - 1]);
                    }
                }
                SupergradInterval::point(*slopes.last().expect("validated"))
            }
            ScalarConcave::Log1p {} => SupergradInterval::point(1.0 / (1.0 + u)),
            ScalarConcave::Sqrt {} => {
                let g = if u > 0.0 { 0.5 / num::sqrt(u) } else { f64::INFINITY };
                SupergradInterval::point(g.min(slope_cap))
            }
            ScalarConcave::Power { p } => {
                let g = if u > 0.0 { p * num::powf(u, p - 1.0) } else { f64::INFINITY };
                SupergradInterval::point(g.min(slope_cap))
            }
            ScalarConcave::Linear { slope } => SupergradInterval::point(*slope),
            ScalarConcave::NegPlusPenalty { l, b } => {
                if near(u, *b) {
                    SupergradInterval::new(-l, 0.0)
                } else if u < *b {
                    SupergradInterval::point(0.0)
                } else {
                    SupergradInterval::point(-l)
                }
            }
        }
    }

    /// Right derivative at 0 (`+inf` for sqrt and power).
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            ScalarConcave::Sqrt {} | ScalarConcave::Power { .. } => f64::INFINITY,
            _ => self.supergrad(0.0).hi,
        }
    }

    /// The set `{u >= 0 : v in supergrad(u)}` as `[lo, hi]`, where the
    /// superdifferential at 0 is taken to be `[f'(0+), inf)`. An empty level
    /// set beyond the domain is reported as `[inf, inf]`.
    pub fn level_set(&self, v: f64) -> (f64, f64) {
        let inf = f64::INFINITY;
        match self {
            ScalarConcave::Cap { scale } => {
                if v > *scale {
                    (0.0, 0.0)
                } else if v == *scale {
                    (0.0, 1.0)
                } else if v > 0.0 {
                    (1.0, 1.0)
                } else if v == 0.0 {
                    (1.0, inf)
                } else {
                    (inf, inf)
                }
            }
            ScalarConcave::PiecewiseLinear { breakpoints, slopes } => {
                let n = slopes.len();
                if v > slopes[0] {
                    return (0.0, 0.0);
                }
                for i in 0..n {
                    let end = breakpoints.get(i + 1).copied().unwrap_or(inf);
                    if v == slopes[i] {
                        return (breakpoints[i], end);
                    }
                    if i + 1 < n && v > slopes[i + 1] {
                        return (end, end);
                    }
                }
                (inf, inf)
            }
            ScalarConcave::Log1p {} => {
                if v >= 1.0 {
                    (0.0, 0.0)
                } else if v > 0.0 {
                    let u = 1.0 / v - 1.0;
                    (u, u)
                } else {
                    (inf, inf)
                }
            }
            ScalarConcave::Sqrt {} => {
                if v > 0.0 {
                    let u = 0.25 / (v * v);
                    (u, u)
                } else {
                    (inf, inf)
                }
            }
            ScalarConcave::Power { p } => {
                if v > 0.0 {
                    let u = num::powf(v / p, 1.0 / (p - 1.0));
                    (u, u)
                } else {
                    (inf, inf)
                }
            }
            ScalarConcave::Linear { slope } => {
                if v > *slope {
                    (0.0, 0.0)
                } else if v == *slope {
                    (0.0, inf)
                } else {
                    (inf, inf)
                }
            }
            ScalarConcave::NegPlusPenalty { l, b } => {
                if v > 0.0 {
                    (0.0, 0.0)
                } else if v == 0.0 {
                    (0.0, *b)
                } else if v > -l {
                    (*b, *b)
                } else if v == -l {
                    (*b, inf)
                } else {
                    (inf, inf)
                }
            }
        }
    }

    /// Hinge decomposition for the piecewise-linear kinds; `None` otherwise.
    pub fn hinge_form(&self) -> Option<HingeForm> {
        match self {
            ScalarConcave::Cap { scale } => Some(HingeForm { s0: *scale, hinges: alloc::vec![(1.0, *scale)] }),
            ScalarConcave::Linear { slope } => Some(HingeForm { s0: *slope, hinges: Vec::new() }),
            ScalarConcave::NegPlusPenalty { l, b } => Some(HingeForm { s0: 0.0, hinges: alloc::vec![(*b, *l)] }),
            ScalarConcave::PiecewiseLinear { breakpoints, slopes } => {
                let hinges = (1..slopes.len()).map(|i| (breakpoints[i], slopes[i - 1] - slopes[i])).collect();
                Some(HingeForm { s0: slopes[0], hinges })
            }
            _ => None,
        }
    }

    /// Kinks of the function (empty for the smooth kinds).
    pub fn kinks(&self) -> Vec<f64> {
        self.hinge_form().map(|h| h.hinges.iter().map(|&(b, _)| b).collect()).unwrap_or_default()
    }

    /// `alpha(u) = inf_{y in supergrad(u)} f*(y) / f(u)`.
    pub fn alpha_at(&self, u: f64) -> Result<f64> {
        let value = self.value(u);
        if !(value > 0.0) || u < 0.0 {
            return Err(Error::UndefinedRatio { u, value });
        }
        let g = self.supergrad(u);
        // f* is concave, so its infimum over an interval sits at an endpoint.
        let c = self.conjugate(g.lo).min(self.conjugate(g.hi));
        Ok(c / value)
    }

    /// Infimum of `alpha` over a log-spaced grid on `(0, u_max]` (plus the
    /// kinks), with closed-form values where the kind has one.
    pub fn alpha_bar(&self, u_max: f64, grid: usize) -> Result<f64> {
        if grid < 2 {
            return Err(Error::Invalid("alpha_bar grid needs at least 2 points".into()));
        }
        if !(u_max > 0.0) {
            return Err(Error::Domain(format!("u_max = {u_max} must be positive")));
        }
        match self {
            ScalarConcave::Cap { .. } if u_max >= 1.0 => return Ok(-1.0),
            ScalarConcave::Linear { slope } if *slope > 0.0 => return Ok(0.0),
            ScalarConcave::Power { p } => return Ok(p - 1.0),
            ScalarConcave::Sqrt {} => return Ok(-0.5),
            _ => {}
        }
        let lo_exp = -6.0f64;
        let mut best = f64::INFINITY;
        let points = (0..grid)
            .map(|k| u_max * num::powf(10.0, lo_exp * (1.0 - k as f64 / (grid - 1) as f64)))
            .chain(self.kinks().into_iter().filter(|&b| b > 0.0 && b <= u_max));
        for u in points {
            if self.value(u) > 0.0 {
                best = best.min(self.alpha_at(u)?);
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::UndefinedRatio { u: u_max, value: self.value(u_max) })
        }
    }
}
