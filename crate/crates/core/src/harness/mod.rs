//! Scenario orchestration: configuration, CSV I/O, the train/test pipeline,
//! metrics, sweeps and the command-line interface.

pub mod bundle;
pub mod cli;
pub mod config;
pub mod csv_io;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use bundle::{build_model_sets, ModelBundle};
pub use config::{default_eta_s, parse_config, parse_config_str, ScenarioConfig};
pub use metrics::{rmse, DayMetrics, MetricRange, Metrics};
pub use pipeline::{estimate_noise, fit_bundle, load_test_days, DayData, MIN_TEST_DAY};
pub use scenario::{run_kf_benchmark, run_scenario_on, write_scenario_outputs, KfOutcome, ScenarioOutcome};
pub use sweep::{sweep_eta, sweep_lambda, EtaCell, LambdaCell};
