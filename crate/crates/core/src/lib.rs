//! Real-time disaggregation of a distribution feeder's demand.
//!
//! A feeder's one-minute total-demand signal is split, online, into the
//! aggregate demand of a residential air-conditioner population and the
//! demand of everything else ("other load"). A bank of identified load
//! models produces per-pair predictions; a dynamic-mirror-descent update
//! adjusts each pair against the arriving measurement and a Fixed Share
//! weighting blends the pairs into the emitted estimate. A bank of Kalman
//! filters over the same models serves as the benchmark, and a synthetic
//! plant supplies ground truth.
//!
//! The crate is organized around five subsystems:
//!
//! - [`plant`] — synthetic feeder ground truth (TCL population, other load,
//!   weather, calibration),
//! - [`models`] — offline identification of the predictor bank (time-of-day
//!   lookups, ridge regressions, Markov-chain AC models) and their runtime
//!   evaluation,
//! - [`dfs`] — the online learning engine (per-expert updates plus Fixed
//!   Share weighting),
//! - [`kalman`] — the Kalman-filter benchmark bank,
//! - [`harness`] — configuration, CSV I/O, scenarios, sweeps and the CLI.
//!
//! See the `examples/` directory for a runnable walkthrough of each
//! capability; the `feeder-disagg` binary exposes the same pipeline as
//! subcommands.

pub mod dfs;
pub mod error;
pub mod harness;
pub mod kalman;
pub mod models;
pub mod plant;
pub mod series;

pub use error::{Error, Result};
