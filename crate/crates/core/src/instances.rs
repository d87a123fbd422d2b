//! Seeded generators for adwords, online LP and log-det instances.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cones::linalg::{sym_eigenvalues, Mat};
use crate::cones::{
    graph_base_matrix, incidence, l_bound_lp, theta_of_instance, FeasibleSet, LogDetObjective, PenaltyKind,
    PenaltyLpObjective, Step, StepMatrix,
};
use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "v1";

/// Relative margin of `l` above `2 / lambda_min(A0)`.
pub const LOGDET_L_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum LogDetSource {
    /// Uniform directions scaled to `||a||^2 = 2`, with `A0 = I`.
    RandomVectors,
    /// Random edges over a connected base graph; `A0 = L0 + 1 1^T`.
    GraphIncidence { edges: Vec<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    AdwordsTriangular { n: usize, phase_len: usize },
    /// `n` resources, `m` steps, `k` options per step.
    LpRandom { n: usize, m: usize, k: usize, density: f64 },
    LogdetStream { n: usize, m: usize, b: f64, source: LogDetSource },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

/// Quantities attached by the generator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offline_opt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub version: String,
    #[serde(flatten)]
    pub spec: InstanceSpec,
    pub steps: Vec<Step>,
    #[serde(default)]
    pub meta: InstanceMeta,
}

impl Instance {
    /// The exact-penalty LP objective with the attached `l` and `theta`.
    pub fn lp_objective(&self, kind: PenaltyKind) -> Result<PenaltyLpObjective> {
        let Family::LpRandom { n, .. } = self.spec.family else {
            return Err(Error::Invalid("not an LP instance".into()));
        };
        let (Some(l), Some(theta)) = (self.meta.l, self.meta.theta) else {
            return Err(Error::Invalid("LP instance lacks l or theta".into()));
        };
        let obj = PenaltyLpObjective { kind, l, budget: vec![1.0; n], theta };
        obj.validate()?;
        Ok(obj)
    }

    pub fn logdet_objective(&self) -> Result<LogDetObjective> {
        let (Some(a0), Some(b), Some(l)) = (&self.meta.a0, self.meta.b, self.meta.l) else {
            return Err(Error::Invalid("not a log-det instance".into()));
        };
        LogDetObjective::new(a0.clone(), b, l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!("unsupported instance version {:?}", self.version)));
        }
        self.steps.iter().try_for_each(Step::validate)
    }
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    match &spec.family {
        Family::AdwordsTriangular { n, phase_len } => gen_adwords_triangular(*n, *phase_len),
        Family::LpRandom { n, m, k, density } => gen_lp_random(*n, *m, *k, *density, spec.seed),
        Family::LogdetStream { n, m, b, source } => gen_logdet_stream(*n, *m, *b, source, spec.seed),
    }
}

/// `n` unit budgets and `n` phases of `phase_len` steps. Every step of phase
/// `i` bids `1 / phase_len` on advertisers `0..n - i`, so the optimum `n`
/// sends phase `i` to advertiser `n - 1 - i`, while lowest-index greedy
/// exhausts the shared advertisers first.
pub fn gen_adwords_triangular(n: usize, phase_len: usize) -> Result<Instance> {
    if n == 0 || phase_len == 0 {
        return Err(Error::Invalid("n and phase_len must be at least 1".into()));
    }
    let bid = 1.0 / phase_len as f64;
    let mut steps = Vec::with_capacity(n * phase_len);
    for i in 0..n {
        let w: Vec<f64> = (0..n).map(|j| if j < n - i { bid } else { 0.0 }).collect();
        for _ in 0..phase_len {
            steps.push(Step::new(StepMatrix::Diag { w: w.clone() }, FeasibleSet::Simplex { k: n })?);
        }
    }
    Ok(Instance {
        version: SCHEMA_VERSION.into(),
        spec: InstanceSpec { family: Family::AdwordsTriangular { n, phase_len }, seed: 0 },
        steps,
        meta: InstanceMeta { offline_opt: Some(n as f64), theta: Some(1.0), l: Some(1.0), ..Default::default() },
    })
}

/// Random packing LP with unit budgets. Each `B` entry is present with
/// probability `density`; an all-zero column gets one forced entry.
pub fn gen_lp_random(n: usize, m: usize, k: usize, density: f64, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 || k == 0 {
        return Err(Error::Invalid("n, m and k must be at least 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Invalid(format!("density {density} must be in (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Expected total load per resource is about 2 budgets.
    let scale = 4.0 / (m as f64 * density);
    let mut steps = Vec::with_capacity(m);
    for _ in 0..m {
        let c: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5) * scale).collect();
        let mut b = vec![vec![0.0; k]; n];
        for j in 0..k {
            let mut any = false;
            for row in b.iter_mut() {
                if rng.gen_bool(density) {
                    row[j] = rng.gen_range(0.05..1.0) * scale;
                    any = true;
                }
            }
            if !any {
                let i = rng.gen_range(0..n);
                b[i][j] = rng.gen_range(0.05..1.0) * scale;
            }
        }
        steps.push(Step::new(StepMatrix::Stacked { c, b }, FeasibleSet::Simplex { k })?);
    }
    let theta = theta_of_instance(&steps)?;
    let l = l_bound_lp(&steps)?;
    Ok(Instance {
        version: SCHEMA_VERSION.into(),
        spec: InstanceSpec { family: Family::LpRandom { n, m, k, density }, seed },
        steps,
        meta: InstanceMeta { theta: Some(theta), l: Some(l), ..Default::default() },
    })
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (0..n).all(|v| find(&mut parent, v) == root)
}

/// Rank-one stream for budgeted D-optimal design, with `l` just above
/// `2 / lambda_min(A0)`.
pub fn gen_logdet_stream(n: usize, m: usize, b: f64, source: &LogDetSource, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Invalid("log-det streams need n >= 2".into()));
    }
    if !(b > 0.0) {
        return Err(Error::Invalid(format!("budget {b} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::with_capacity(m);
    let a0 = match source {
        LogDetSource::RandomVectors => {
            for _ in 0..m {
                let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = crate::num::sqrt(a.iter().map(|v| v * v).sum::<f64>()).max(1e-12);
                let s = core::f64::consts::SQRT_2 / norm;
                a.iter_mut().for_each(|v| *v *= s);
                steps.push(Step::new(StepMatrix::RankOne { a }, FeasibleSet::UnitInterval {})?);
            }
            Mat::identity(n)
        }
        LogDetSource::GraphIncidence { edges } => {
            if let Some(&(i, j)) = edges.iter().find(|(i, j)| *i >= n || *j >= n || i == j) {
                return Err(Error::Invalid(format!("bad edge ({i}, {j}) for n = {n}")));
            }
            if !connected(n, edges) {
                return Err(Error::Invalid("base graph is disconnected".into()));
            }
            for _ in 0..m {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                steps.push(Step::new(StepMatrix::RankOne { a: incidence(n, i, j) }, FeasibleSet::UnitInterval {})?);
            }
            graph_base_matrix(n, edges)
        }
    };
    let lam = sym_eigenvalues(&a0)[0];
    if !(lam > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let l = 2.0 / lam * (1.0 + LOGDET_L_MARGIN);
    Ok(Instance {
        version: SCHEMA_VERSION.into(),
        spec: InstanceSpec { family: Family::LogdetStream { n, m, b, source: source.clone() }, seed },
        steps,
        meta: InstanceMeta { l: Some(l), a0: Some(a0), b: Some(b), theta: Some(crate::num::ln_1p(1.0 / n as f64)), ..Default::default() },
    })
}
