use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::num;
use crate::scalar::{ScalarConcave, SupergradInterval};
use crate::{Error, Result};

/// Behaviour of a smoothing beyond the last grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Derivative is 0 past the grid; requires `y[d] = 0`.
    Zero,
    /// Derivative stays at `y[d]` past the grid.
    HoldLast,
}

/// A concave function `psi_S(u) = int_0^u y(s) ds` where `y` is the linear
/// interpolation of `d + 1` samples on the grid `u_t = t h`.
///
/// `y` is non-increasing, so `psi_S` is concave and continuously
/// differentiable with `psi_S(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SmoothedSamples", into = "SmoothedSamples")]
pub struct SmoothedScalar {
    h: f64,
    y: Vec<f64>,
    cumint: Vec<f64>,
    tail: TailMode,
}

/// Serialized form; the integral is rebuilt and the samples re-validated on
/// load.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SmoothedSamples {
    h: f64,
    y: Vec<f64>,
    tail: TailMode,
}

impl TryFrom<SmoothedSamples> for SmoothedScalar {
    type Error = Error;

    fn try_from(s: SmoothedSamples) -> Result<Self> {
        Self::new(s.h, s.y, s.tail)
    }
}

impl From<SmoothedScalar> for SmoothedSamples {
    fn from(s: SmoothedScalar) -> Self {
        Self { h: s.h, y: s.y, tail: s.tail }
    }
}

impl SmoothedScalar {
    pub fn new(h: f64, y: Vec<f64>, tail: TailMode) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("grid step h = {h} must be positive")));
        }
        if y.len() < 2 {
            return Err(Error::Invalid("a smoothing needs at least two samples".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("derivative samples must be finite".into()));
        }
        if let Some(t) = y.windows(2).position(|w| w[1] > w[0] + 1e-12 * w[0].abs().max(1.0)) {
            return Err(Error::Invalid(format!(
                "derivative samples must be non-increasing (y[{}] = {} < y[{}] = {})",
                t,
                y[t],
                t + 1,
                y[t + 1]
            )));
        }
        if tail == TailMode::Zero && num::abs(y[y.len() - 1]) > 1e-12 {
            return Err(Error::Invalid("zero tail requires the last derivative sample to be 0".into()));
        }
        let mut cumint = Vec::with_capacity(y.len());
        cumint.push(0.0);
        for t in 1..y.len() {
            let prev = cumint[t - 1];
            cumint.push(prev + 0.5 * h * (y[t - 1] + y[t]));
        }
        Ok(Self { h, y, cumint, tail })
    }

    /// Samples `f`'s minimal supergradient on the grid (the unsmoothed
    /// derivative, with the slope at 0 taken as the right derivative).
    pub fn from_base(base: &ScalarConcave, h: f64, d: usize, tail: TailMode) -> Result<Self> {
        let mut y: Vec<f64> = (0..=d).map(|t| base.supergrad(t as f64 * h).lo).collect();
        y[0] = base.supergrad(0.0).hi;
        if tail == TailMode::Zero {
            y[d] = 0.0;
        }
        Self::new(h, y, tail)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of grid intervals `d`.
    pub fn d(&self) -> usize {
        self.y.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.h * self.d() as f64
    }

    pub fn tail(&self) -> TailMode {
        self.tail
    }

    pub fn samples(&self) -> &[f64] {
        &self.y
    }

    pub fn cumint(&self) -> &[f64] {
        &self.cumint
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let d = self.d();
        let t = num::floor(u / self.h) as usize;
        if t >= d {
            (d, u - self.horizon())
        } else {
            (t, u - t as f64 * self.h)
        }
    }

    /// Derivative `y(u)`.
    pub fn slope(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        let (t, r) = self.locate(u);
        if t >= self.d() {
            return match self.tail {
                TailMode::Zero => 0.0,
                TailMode::HoldLast => self.y[t],
            };
        }
        let w = r / self.h;
        self.y[t] + w * (self.y[t + 1] - self.y[t])
    }

    /// `psi_S(u)`.
    pub fn value(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        let (t, r) = self.locate(u);
        if t >= self.d() {
            return match self.tail {
                TailMode::Zero => self.cumint[t],
                TailMode::HoldLast => self.cumint[t] + r * self.y[t],
            };
        }
        let end = self.slope(u);
        self.cumint[t] + 0.5 * r * (self.y[t] + end)
    }

    pub fn supergrad(&self, u: f64) -> SupergradInterval {
        SupergradInterval::point(self.slope(u))
    }

    /// `{u >= 0 : v in supergrad(u)}`, with `[y(0), inf)` as the
    /// superdifferential at 0; `[inf, inf]` when `v` is never reached.
    pub fn level_set(&self, v: f64) -> (f64, f64) {
        let inf = f64::INFINITY;
        let y = &self.y;
        let d = self.d();
        let tail_slope = match self.tail {
            TailMode::Zero => 0.0,
            TailMode::HoldLast => y[d],
        };
        if v > y[0] {
            return (0.0, 0.0);
        }
        if v < tail_slope {
            return (inf, inf);
        }
        // First grid index with y <= v, last index with y >= v.
        let first_le = y.partition_point(|&s| s > v);
        let last_ge = y.partition_point(|&s| s >= v);
        let lo = if first_le == 0 {
            0.0
        } else if first_le > d {
            self.horizon()
        } else {
            let (a, b) = (y[first_le - 1], y[first_le]);
            let w = if a > b { (a - v) / (a - b) } else { 0.0 };
            (first_le as f64 - 1.0 + w) * self.h
        };
        let hi = if last_ge > d {
            if v == tail_slope {
                inf
            } else {
                self.horizon()
            }
        } else if last_ge == 0 {
            0.0
        } else {
            let (a, b) = (y[last_ge - 1], y[last_ge]);
            let w = if a > b { (a - v) / (a - b) } else { 1.0 };
            (last_ge as f64 - 1.0 + w) * self.h
        };
        (lo, hi.max(lo))
    }

    /// Adds a constant to every derivative sample (e.g. a linear reward).
    pub fn shifted(&self, slope: f64) -> Result<Self> {
        let y = self.y.iter().map(|v| v + slope).collect();
        let tail = if slope != 0.0 { TailMode::HoldLast } else { self.tail };
        Self::new(self.h, y, tail)
    }
}

/// Lemma-2 running minimum `y_bar[t] = min_{s <= t} y[s]`.
pub fn make_monotone(y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut run = f64::INFINITY;
    for &v in y {
        run = run.min(v);
        out.push(run);
    }
    out
}
