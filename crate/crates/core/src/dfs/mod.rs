//! The online learning engine: per-expert measurement/model updates and
//! Fixed Share weighting over the expert bank.

mod engine;
mod fixed_share;
mod theta;

pub use engine::{
    combine, run_day, DayResult, DfsConfig, ExpertState, ModelSet, UpdateMethod,
};
pub use fixed_share::fixed_share;
pub use theta::{
    kappa_update, loss, project_simplex2, theta_tilde, OutputMap, Theta, ThetaLayout,
};
