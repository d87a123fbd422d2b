//! Objectives over the nonnegative orthant and the PSD cone, feasible sets,
//! dual objectives, and the log-det inverse state.

mod antitone;
pub mod linalg;
mod logdet;
mod lp_ball;
mod objective;
mod step;

pub use antitone::{antitone_check, antitone_check_fn, antitone_check_logdet, AntitoneReport, ANTITONE_TOL};
pub use linalg::Mat;
pub use logdet::{
    graph_base_matrix, incidence, logdet_antitone_violation, logdet_step_gain, LogDetObjective, LogDetState, DRIFT_TOL, REFACTOR_EVERY,
};
pub use lp_ball::{dual_exponent, lp_ball_distance, q_norm, LpDistance};
pub use objective::{
    dual_objective, Coord, LpBallObjective, OrthantObjective, PenaltyKind, PenaltyLpObjective, SeparableObjective,
};
pub use step::{l_bound_lp, theta_of_instance, FeasibleSet, Step, StepMatrix, L_BOUND_EPS};
