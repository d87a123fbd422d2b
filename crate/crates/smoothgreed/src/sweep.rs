//! Batches of runs over instance sizes and seeds.

use smoothgreed_core::cones::PenaltyKind;
use smoothgreed_core::instances::{generate, Family, InstanceSpec};
use smoothgreed_core::online::Algorithm;

use crate::io::num;
use crate::parallel::parallel_map;
use crate::pipeline::{algo_label, evaluate, RunSummary, Smoothing};
use crate::CliError;

#[derive(Clone, Debug)]
pub struct SweepJob {
    pub spec: InstanceSpec,
    pub algo: Algorithm,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub job: SweepJob,
    pub summary: RunSummary,
}

pub const HEADER: [&str; 13] =
    ["family", "n", "size", "seed", "algo", "smoothing", "P", "D", "ratio_lb", "true_ratio", "bound", "passed", "inner_failures"];

/// Runs every job in parallel; rows come back in job order.
pub fn run_jobs(
    jobs: &[SweepJob],
    penalty: Option<PenaltyKind>,
    smoothing: &Smoothing,
) -> Result<Vec<SweepRow>, CliError> {
    let results = parallel_map(jobs, |job| -> Result<SweepRow, CliError> {
        let inst = generate(&job.spec)?;
        let (_, summary) = evaluate(&inst, penalty, smoothing, job.algo)?;
        Ok(SweepRow { job: job.clone(), summary })
    });
    results.into_iter().collect()
}

fn size_of(f: &Family) -> (usize, usize) {
    match *f {
        Family::AdwordsTriangular { n, phase_len } => (n, phase_len),
        Family::LpRandom { n, m, .. } => (n, m),
        Family::LogdetStream { n, m, .. } => (n, m),
    }
}

pub fn to_record(row: &SweepRow) -> Vec<String> {
    let s = &row.summary;
    let (n, size) = size_of(&row.job.spec.family);
    vec![
        s.family.clone(),
        n.to_string(),
        size.to_string(),
        row.job.spec.seed.to_string(),
        algo_label(row.job.algo).into(),
        s.smoothing.clone(),
        num(s.primal),
        num(s.dual),
        num(s.ratio_lb),
        s.true_ratio.map_or_else(String::new, num),
        num(s.bound),
        s.passed.to_string(),
        s.inner_failures.to_string(),
    ]
}
