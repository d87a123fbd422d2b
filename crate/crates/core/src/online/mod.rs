//! The online engines (sequential and simultaneous updates), their traces
//! and the certificates computed from a trace.

mod certify;
mod engine;
mod solvers;

pub use certify::{certify, duality_gap_diagnostics, BoundRule, CertificateReport, LemmaReport};
pub use engine::{run, run_sequential, run_simultaneous, Algorithm, FinalDual, Problem, RunTrace, StepRecord, INTERIOR_SHIFT};
pub use solvers::{coordinate_max, InnerMethod, InnerSolution};
