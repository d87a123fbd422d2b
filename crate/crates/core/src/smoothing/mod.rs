//! Smoothed objectives: closed-form Nesterov smoothings, the optimal
//! smoothing designer, and the verifier that certifies any candidate.

mod certificate;
mod design;
mod nesterov;
mod smoothed;
mod verify;

pub use certificate::{adwords_certificate_check, AdwordsCertificate};
pub use design::{design_optimal, design_sequential, DesignResult, DesignSpec, Variant};
pub use nesterov::{
    nesterov_hinge_sum, nesterov_logdet_smoothing, nesterov_penalty_smoothing, nesterov_penalty_smoothing_with,
    NesterovSmoothing,
    DEFAULT_NESTEROV_GRID,
};
pub use smoothed::{make_monotone, SmoothedScalar, TailMode};
pub use verify::{kappa_of, verify_beta, verify_beta_at, VerifyPoint, VerifyReport};
