//! Ratio curves of optimal smoothings: against the horizon `u_max` (1e:
//! log1p, 1f: sqrt) and against the sequential constant `c` (2a: the
//! three-piece function, 2b: log1p).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use smoothgreed_core::smoothing::{design_optimal, DesignResult, DesignSpec};
use smoothgreed_core::ScalarConcave;

use crate::io::{num, provenance, write_csv};
use crate::parallel::parallel_map;
use crate::CliError;

pub const DEFAULT_FIGURE_GRID: usize = 400;
/// Horizon of the log1p sequential sweep.
pub const LOG1P_SEQ_HORIZON: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    F1e,
    F1f,
    F2a,
    F2b,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::F1e, Figure::F1f, Figure::F2a, Figure::F2b];

    pub fn id(self) -> &'static str {
        match self {
            Figure::F1e => "1e",
            Figure::F1f => "1f",
            Figure::F2a => "2a",
            Figure::F2b => "2b",
        }
    }

    pub fn param_name(self) -> &'static str {
        match self {
            Figure::F1e | Figure::F1f => "u_max",
            Figure::F2a | Figure::F2b => "c",
        }
    }

    /// Sweep values: `u_max = 10^(-1 + k/4)` for `k = 0..=12`, or
    /// `c = 0, 0.1, ..., 1`.
    pub fn params(self) -> Vec<f64> {
        match self {
            Figure::F1e | Figure::F1f => (0..=12).map(|k| 10f64.powf(-1.0 + k as f64 / 4.0)).collect(),
            Figure::F2a | Figure::F2b => (0..=10).map(|k| k as f64 / 10.0).collect(),
        }
    }

    pub fn spec(self, param: f64, d: usize) -> DesignSpec {
        match self {
            Figure::F1e => DesignSpec::new(ScalarConcave::log1p(), param, d),
            Figure::F1f => DesignSpec::new(ScalarConcave::sqrt(), param, d),
            Figure::F2a => DesignSpec::new(ScalarConcave::three_piece(), 1.0, d).sequential(param),
            Figure::F2b => DesignSpec::new(ScalarConcave::log1p(), LOG1P_SEQ_HORIZON, d).sequential(param),
        }
    }

    pub fn file_name(self) -> String {
        format!("fig_{}.csv", self.id())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Figure::ALL.into_iter().find(|f| f.id() == s).ok_or_else(|| format!("unknown figure {s:?} (expected 1e, 1f, 2a or 2b)"))
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug)]
pub struct FigurePoint {
    pub param: f64,
    pub ratio: f64,
    pub beta: f64,
    pub certified: bool,
}

/// All points of one or more figures, computed in parallel.
pub fn compute(figs: &[Figure], d: usize) -> Result<Vec<(Figure, Vec<FigurePoint>)>, CliError> {
    let jobs: Vec<(Figure, f64)> = figs.iter().flat_map(|&f| f.params().into_iter().map(move |p| (f, p))).collect();
    let results: Vec<Result<DesignResult, _>> = parallel_map(&jobs, |&(f, p)| design_optimal(&f.spec(p, d)));
    let mut out: Vec<(Figure, Vec<FigurePoint>)> = figs.iter().map(|&f| (f, Vec::new())).collect();
    for (&(f, param), r) in jobs.iter().zip(results) {
        let r = r?;
        let slot = out.iter_mut().find(|(g, _)| *g == f).expect("figure listed");
        slot.1.push(FigurePoint { param, ratio: r.ratio(), beta: r.beta, certified: r.certified });
    }
    Ok(out)
}

pub fn write(dir: &Path, fig: Figure, points: &[FigurePoint], d: usize) -> Result<PathBuf, CliError> {
    let path = dir.join(fig.file_name());
    let prov = provenance("figures", None, &[("which", fig.id().into()), ("grid", d.to_string())]);
    let rows: Vec<Vec<String>> =
        points.iter().map(|p| vec![num(p.param), num(p.ratio), num(p.beta), p.certified.to_string()]).collect();
    write_csv(&path, &prov, &[fig.param_name(), "ratio", "beta", "certified"], &rows)?;
    Ok(path)
}
