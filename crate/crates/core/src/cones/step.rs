use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Feasible set `F_t` of one step; every kind contains 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FeasibleSet {
    /// `{x >= 0, 1^T x <= 1}` in `R^k`.
    Simplex { k: usize },
    /// `[0, 1]`.
    UnitInterval {},
    /// `[0, 1]^k`.
    Box { k: usize },
}

impl FeasibleSet {
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Simplex { k } | FeasibleSet::Box { k } => *k,
            FeasibleSet::UnitInterval {} => 1,
        }
    }

    /// `max_{x in F} <x, z>` and the maximizer; ties go to the lowest
    /// vertex index, and to 0 when nothing is positive.
    pub fn support(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let k = self.dim();
        if z.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: z.len() });
        }
        let mut x = vec![0.0; k];
        match self {
            FeasibleSet::Simplex { .. } => {
                let mut best = 0.0;
                let mut arg = None;
                for (j, &v) in z.iter().enumerate() {
                    if v > best {
                        best = v;
                        arg = Some(j);
                    }
                }
                if let Some(j) = arg {
                    x[j] = 1.0;
                }
                Ok((best, x))
            }
            FeasibleSet::UnitInterval {} | FeasibleSet::Box { .. } => {
                let mut total = 0.0;
                for (j, &v) in z.iter().enumerate() {
                    if v > 0.0 {
                        total += v;
                        x[j] = 1.0;
                    }
                }
                Ok((total, x))
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|&v| !(v >= -tol)) {
            return false;
        }
        match self {
            FeasibleSet::Simplex { .. } => x.iter().sum::<f64>() <= 1.0 + tol,
            _ => x.iter().all(|&v| v <= 1.0 + tol),
        }
    }

    /// Vertices other than 0.
    pub fn unit_vertices(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let k = self.dim();
        (0..k).map(move |j| {
            let mut v = vec![0.0; k];
            v[j] = 1.0;
            v
        })
    }
}

/// The linear map `A_t` of one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum StepMatrix {
    /// `x -> w o x` (adwords bids).
    Diag { w: Vec<f64> },
    /// `x -> (c^T x, B x)`, with `B` given by rows.
    Stacked { c: Vec<f64>, b: Vec<Vec<f64>> },
    /// `x -> (a a^T x, x)` on the PSD cone times the budget axis.
    RankOne { a: Vec<f64> },
}

impl StepMatrix {
    pub fn in_dim(&self) -> usize {
        match self {
            StepMatrix::Diag { w } => w.len(),
            StepMatrix::Stacked { c, .. } => c.len(),
            StepMatrix::RankOne { .. } => 1,
        }
    }

    /// Output dimension on the orthant; `None` for the PSD lift.
    pub fn out_dim(&self) -> Option<usize> {
        match self {
            StepMatrix::Diag { w } => Some(w.len()),
            StepMatrix::Stacked { b, .. } => Some(1 + b.len()),
            StepMatrix::RankOne { .. } => None,
        }
    }

    /// `A x` on the orthant.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            StepMatrix::Diag { w } => w.iter().zip(x).map(|(a, b)| a * b).collect(),
            StepMatrix::Stacked { c, b } => {
                let mut out = Vec::with_capacity(1 + b.len());
                out.push(dot(c, x));
                out.extend(b.iter().map(|row| dot(row, x)));
                out
            }
            StepMatrix::RankOne { .. } => panic!("apply is only defined for orthant steps"),
        }
    }

    /// `A^T y` on the orthant.
    pub fn transpose_apply(&self, y: &[f64]) -> Vec<f64> {
        match self {
            StepMatrix::Diag { w } => w.iter().zip(y).map(|(a, b)| a * b).collect(),
            StepMatrix::Stacked { c, b } => {
                let mut z: Vec<f64> = c.iter().map(|cj| cj * y[0]).collect();
                for (row, yi) in b.iter().zip(&y[1..]) {
                    for (zj, bij) in z.iter_mut().zip(row) {
                        *zj += bij * yi;
                    }
                }
                z
            }
            StepMatrix::RankOne { .. } => panic!("transpose_apply is only defined for orthant steps"),
        }
    }

    /// Column `j` of `A` on the orthant.
    pub fn column(&self, j: usize) -> Vec<f64> {
        match self {
            StepMatrix::Diag { w } => {
                let mut col = vec![0.0; w.len()];
                col[j] = w[j];
                col
            }
            StepMatrix::Stacked { c, b } => {
                let mut col = Vec::with_capacity(1 + b.len());
                col.push(c[j]);
                col.extend(b.iter().map(|row| row[j]));
                col
            }
            StepMatrix::RankOne { .. } => panic!("column is only defined for orthant steps"),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One online step `(A_t, F_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(rename = "A")]
    pub a: StepMatrix,
    #[serde(rename = "F")]
    pub f: FeasibleSet,
}

impl Step {
    pub fn new(a: StepMatrix, f: FeasibleSet) -> Result<Self> {
        let s = Self { a, f };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.f.dim();
        if self.a.in_dim() != k {
            return Err(Error::DimensionMismatch { expected: k, found: self.a.in_dim() });
        }
        let entries: Vec<f64> = match &self.a {
            StepMatrix::Diag { w } => w.clone(),
            StepMatrix::Stacked { c, b } => {
                if let Some(row) = b.iter().find(|r| r.len() != k) {
                    return Err(Error::DimensionMismatch { expected: k, found: row.len() });
                }
                c.iter().chain(b.iter().flatten()).copied().collect()
            }
            StepMatrix::RankOne { a } => {
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Invalid("rank-one vector must be finite".into()));
                }
                if !matches!(self.f, FeasibleSet::UnitInterval {}) {
                    return Err(Error::Invalid("rank-one steps use the unit interval".into()));
                }
                return Ok(());
            }
        };
        if let Some(v) = entries.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Invalid(format!("step entries must be finite and nonnegative, found {v}")));
        }
        Ok(())
    }

    /// `max_{x in F} (A x)_i` for every orthant output coordinate.
    pub fn max_increment(&self) -> Vec<f64> {
        let out = self.a.out_dim().unwrap_or(0);
        (0..out)
            .map(|i| {
                let row: Vec<f64> = (0..self.f.dim()).map(|j| self.a.column(j)[i]).collect();
                match self.f {
                    FeasibleSet::Simplex { .. } => row.iter().copied().fold(0.0, f64::max),
                    _ => row.iter().sum(),
                }
            })
            .collect()
    }
}

/// `theta = min_t min_{x in F_t} c_t^T x / 1^T B_t x`, attained at a unit
/// vertex; adwords steps use `c = B = diag(w)`.
pub fn theta_of_instance(steps: &[Step]) -> Result<f64> {
    let mut theta = f64::INFINITY;
    for step in steps {
        for j in 0..step.f.dim() {
            let (c, colsum) = match &step.a {
                StepMatrix::Diag { w } => (w[j], w[j]),
                StepMatrix::Stacked { c, b } => (c[j], b.iter().map(|r| r[j]).sum()),
                StepMatrix::RankOne { .. } => return Err(Error::Invalid("theta is defined for orthant steps".into())),
            };
            if colsum > 0.0 {
                theta = theta.min(c / colsum);
            }
        }
    }
    if theta.is_finite() {
        Ok(theta)
    } else {
        Err(Error::Invalid("no step consumes any budget".into()))
    }
}

/// Relative margin added to the dual-variable bound.
pub const L_BOUND_EPS: f64 = 1e-6;

/// `(1 + eps) max { c_tj / B_tij : B_tij > 0 }`.
pub fn l_bound_lp(steps: &[Step]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for step in steps {
        for j in 0..step.f.dim() {
            match &step.a {
                StepMatrix::Diag { w } => {
                    if w[j] > 0.0 {
                        worst = worst.max(1.0);
                    }
                }
                StepMatrix::Stacked { c, b } => {
                    for row in b {
                        if row[j] > 0.0 {
                            worst = worst.max(c[j] / row[j]);
                        }
                    }
                }
                StepMatrix::RankOne { .. } => return Err(Error::Invalid("l bound is defined for orthant steps".into())),
            }
        }
    }
    Ok(worst * (1.0 + L_BOUND_EPS))
}
