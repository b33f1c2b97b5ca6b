//! Offline identification of the predictor bank and its runtime evaluation.
//!
//! Four model families cover the two demand components:
//!
//! - time-of-day lookups of the other load, one per weekday ([`tod`]);
//! - ridge regressions over time-of-week and temperature features for both
//!   components ([`features`], [`mlr`]);
//! - constant-temperature two-state Markov-chain AC models, one per
//!   temperature bin ([`lti`]);
//! - temperature-interpolated variants of the chain driven by a lagged or
//!   trailing-mean temperature ([`ltv`], [`lag`]).

mod context;
mod features;
mod lag;
mod lti;
mod ltv;
mod mlr;
mod predictor;
mod tod;

pub use context::DayContext;
pub use features::{build_features, FeatureKind, FeatureSpec, FeatureVector};
pub use lag::{estimate_lag, LagMode};
pub use lti::{advance, identify_lti_bank, LtiBank, LtiBankBuilder, LtiModel};
pub use ltv::{ltv_matrices, LtvMode, LtvModel};
pub use mlr::{fit_mlr, MlrModel, TrainingDay};
pub use predictor::{AcId, AcModel, OlId, OlPredictor, PairId};
pub use tod::{fit_tod, TodModel, SEGMENT_MINUTES};

/// Default temperature grid of the LTI bank, °F.
pub const DEFAULT_GRID_MIN_F: f64 = 74.0;
pub const DEFAULT_GRID_MAX_F: f64 = 99.0;
pub const DEFAULT_GRID_STEP_F: f64 = 1.0;
