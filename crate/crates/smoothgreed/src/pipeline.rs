//! Turns an instance plus objective and smoothing choices into a run, its
//! certificate and its diagnostics.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use smoothgreed_core::cones::{Coord, OrthantObjective, PenaltyKind, SeparableObjective, Step, StepMatrix};
use smoothgreed_core::instances::{Family, Instance};
use smoothgreed_core::online::{
    certify, duality_gap_diagnostics, run, Algorithm, BoundRule, CertificateReport, LemmaReport, Problem, RunTrace,
};
use smoothgreed_core::smoothing::{
    design_optimal, kappa_of, nesterov_hinge_sum, nesterov_logdet_smoothing, verify_beta, DesignSpec, SmoothedScalar,
};
use smoothgreed_core::ScalarConcave;

use crate::CliError;

/// Grid of the adwords design used by `--smoothing design`.
pub const ADWORDS_DESIGN_GRID: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub enum Smoothing {
    None,
    /// Optimal design of the cap (adwords only).
    Design,
    /// Closed-form Nesterov smoothing of the family.
    Nesterov,
    /// A smoothing loaded from a file (adwords only).
    Given(SmoothedScalar),
}

impl Smoothing {
    pub fn label(&self) -> &'static str {
        match self {
            Smoothing::None => "none",
            Smoothing::Design => "design",
            Smoothing::Nesterov => "nesterov",
            Smoothing::Given(_) => "file",
        }
    }

    /// `none`, `design`, `nesterov`, or a path to a smoothing JSON file.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "none" => Smoothing::None,
            "design" => Smoothing::Design,
            "nesterov" => Smoothing::Nesterov,
            path => Smoothing::Given(crate::io::read_json(std::path::Path::new(path))?),
        })
    }
}

/// `sim` or `seq`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Algo(pub Algorithm);

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sim" | "simultaneous" => Ok(Algo(Algorithm::Simultaneous)),
            "seq" | "sequential" => Ok(Algo(Algorithm::Sequential)),
            _ => Err(format!("unknown algorithm {s:?} (expected sim or seq)")),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(algo_label(self.0))
    }
}

pub fn algo_label(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Simultaneous => "sim",
        Algorithm::Sequential => "seq",
    }
}

/// `separable_cap` or `lp_ball:<p>` for LP instances.
pub fn parse_penalty(s: &str) -> Result<PenaltyKind, CliError> {
    if s == "separable_cap" {
        return Ok(PenaltyKind::SeparableCap);
    }
    if let Some(p) = s.strip_prefix("lp_ball:") {
        let p: f64 = p.parse().map_err(|_| CliError::BadInput(format!("bad l_p exponent in {s:?}")))?;
        return Ok(PenaltyKind::LpBall { p });
    }
    Err(CliError::BadInput(format!("unknown LP objective {s:?} (expected separable_cap or lp_ball:<p>)")))
}

/// The certified cap design shared by every adwords run.
pub fn adwords_design() -> Result<&'static (SmoothedScalar, f64), CliError> {
    static DESIGN: OnceLock<Result<(SmoothedScalar, f64), String>> = OnceLock::new();
    DESIGN
        .get_or_init(|| {
            let r = design_optimal(&DesignSpec::new(ScalarConcave::cap(), 1.0, ADWORDS_DESIGN_GRID)).map_err(|e| e.to_string())?;
            Ok((r.smoothed, r.beta))
        })
        .as_ref()
        .map_err(|e| CliError::Infeasible(e.clone()))
}

/// A problem ready to run, with the bound its certificate is held to.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub problem: Problem,
    pub rule: BoundRule,
    /// Inverse Lipschitz constant of the run objective's gradient.
    pub mu: Option<f64>,
}

fn max_bid(steps: &[Step]) -> f64 {
    steps
        .iter()
        .flat_map(|s| match &s.a {
            StepMatrix::Diag { w } => w.clone(),
            _ => Vec::new(),
        })
        .fold(0.0, f64::max)
}

fn inverse_lipschitz(s: &SmoothedScalar) -> Option<f64> {
    let l = s.samples().windows(2).map(|w| (w[0] - w[1]) / s.h()).fold(0.0, f64::max);
    (l > 0.0).then(|| 1.0 / l)
}

pub fn prepare(inst: &Instance, penalty: Option<PenaltyKind>, smoothing: &Smoothing, algo: Algorithm) -> Result<Prepared, CliError> {
    let seq = algo == Algorithm::Sequential;
    match &inst.spec.family {
        Family::AdwordsTriangular { n, .. } => {
            if penalty.is_some() {
                return Err(CliError::BadInput("adwords instances take no LP objective".into()));
            }
            let cap = ScalarConcave::cap();
            let original = OrthantObjective::Separable(SeparableObjective::uniform(Coord::Scalar(cap.clone()), *n));
            let c = max_bid(&inst.steps);
            let s = match smoothing {
                // The cap itself: beta = 2 and the derivative drops by 1 at u = 1.
                Smoothing::None => {
                    let kappa = if seq { c } else { 0.0 };
                    return Ok(Prepared { problem: Problem::orthant(original), rule: BoundRule::Beta { beta: 2.0, kappa }, mu: None });
                }
                Smoothing::Design => adwords_design()?.0.clone(),
                Smoothing::Nesterov => nesterov_hinge_sum(&cap, 1.0, ADWORDS_DESIGN_GRID)?,
                Smoothing::Given(s) => s.clone(),
            };
            let beta = verify_beta(&s, &cap, None).sup_beta;
            let kappa = if seq { kappa_of(&s, &cap, c) } else { 0.0 };
            let mu = inverse_lipschitz(&s);
            let run_obj = OrthantObjective::Separable(SeparableObjective::uniform(Coord::Smoothed(s), *n));
            Ok(Prepared { problem: Problem::smoothed_orthant(run_obj, original), rule: BoundRule::Beta { beta, kappa }, mu })
        }
        Family::LpRandom { .. } => {
            let lp = inst.lp_objective(penalty.unwrap_or(PenaltyKind::SeparableCap))?;
            let problem = match smoothing {
                Smoothing::None => Problem::orthant(lp.orthant(false)?),
                Smoothing::Nesterov => Problem::smoothed_orthant(lp.orthant(true)?, lp.orthant(false)?),
                other => {
                    return Err(CliError::BadInput(format!("smoothing {:?} is not available for LP instances", other.label())))
                }
            };
            Ok(Prepared { problem, rule: BoundRule::RealizedAlpha, mu: None })
        }
        Family::LogdetStream { n, .. } => {
            if penalty.is_some() {
                return Err(CliError::BadInput("log-det instances take no LP objective".into()));
            }
            let obj = inst.logdet_objective()?;
            match smoothing {
                Smoothing::None => Ok(Prepared { problem: Problem::logdet(obj), rule: BoundRule::RealizedAlpha, mu: None }),
                Smoothing::Nesterov => {
                    let ns = nesterov_logdet_smoothing(*n, obj.l, obj.b)?;
                    let rule = if seq { BoundRule::RealizedAlpha } else { BoundRule::Ratio { r: ns.ratio_bound() } };
                    Ok(Prepared { problem: Problem::logdet(obj.with_smoothing(ns.smoothed)), rule, mu: None })
                }
                other => Err(CliError::BadInput(format!("smoothing {:?} is not available for log-det instances", other.label()))),
            }
        }
    }
}

fn family_name(f: &Family) -> &'static str {
    match f {
        Family::AdwordsTriangular { .. } => "adwords_triangular",
        Family::LpRandom { .. } => "lp_random",
        Family::LogdetStream { .. } => "logdet_stream",
    }
}

/// Summary JSON of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub family: String,
    pub seed: u64,
    pub algorithm: String,
    pub smoothing: String,
    #[serde(rename = "P")]
    pub primal: f64,
    #[serde(rename = "D")]
    pub dual: f64,
    pub ratio_lb: f64,
    pub alpha_used: f64,
    pub bound: f64,
    /// `P / OPT` when the instance carries its offline optimum.
    pub true_ratio: Option<f64>,
    pub certificate: CertificateReport,
    pub lemma: LemmaReport,
    pub inner_failures: usize,
    pub passed: bool,
}

pub fn evaluate(
    inst: &Instance,
    penalty: Option<PenaltyKind>,
    smoothing: &Smoothing,
    algo: Algorithm,
) -> Result<(RunTrace, RunSummary), CliError> {
    let prep = prepare(inst, penalty, smoothing, algo)?;
    let trace = run(&prep.problem, &inst.steps, algo)?;
    let cert = certify(&prep.problem, &trace, prep.rule)?;
    let mu = if algo == Algorithm::Sequential { prep.mu } else { None };
    let lemma = duality_gap_diagnostics(&trace, mu);
    let summary = RunSummary {
        version: crate::VERSION.into(),
        family: family_name(&inst.spec.family).into(),
        seed: inst.spec.seed,
        algorithm: algo_label(algo).into(),
        smoothing: smoothing.label().into(),
        primal: cert.primal,
        dual: cert.dual,
        ratio_lb: cert.ratio_lb,
        alpha_used: cert.alpha_used,
        bound: cert.bound,
        true_ratio: inst.meta.offline_opt.map(|opt| trace.primal / opt),
        passed: cert.passed && lemma.passed,
        inner_failures: trace.inner_failures(),
        certificate: cert,
        lemma,
    };
    Ok((trace, summary))
}
