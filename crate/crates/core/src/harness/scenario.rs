//! Scenario execution: online runs over the test days plus the Kalman
//! benchmark, with metric aggregation.

use std::path::Path;

use crate::dfs::{run_day, DayResult, DfsConfig};
use crate::error::Result;
use crate::harness::bundle::{build_model_sets, ModelBundle};
use crate::harness::csv_io;
use crate::harness::metrics::{rmse, DayMetrics, MetricRange, Metrics};
use crate::harness::pipeline::DayData;
use crate::kalman::{run_kf_bank, KfBankDay, NoiseEstimates};

/// Results of one scenario over its test days.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub days: Vec<(usize, DayResult)>,
    pub metrics: Metrics,
}

impl ScenarioOutcome {
    /// Top pairs by final weight on the last day, largest first.
    pub fn top_final_weights(&self, k: usize) -> Vec<(String, f64)> {
        let Some((_, last)) = self.days.last() else {
            return Vec::new();
        };
        let Some(weights) = last.weights.last() else {
            return Vec::new();
        };
        let mut ranked: Vec<(String, f64)> = last
            .pair_ids
            .iter()
            .map(|p| p.to_string())
            .zip(weights.iter().copied())
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        ranked.truncate(k);
        ranked
    }
}

/// Runs the engine over prepared test days with an explicit engine config.
pub fn run_scenario_on(
    dfs_cfg: &DfsConfig,
    bundle: &ModelBundle,
    test_days: &[DayData],
) -> Result<ScenarioOutcome> {
    let mut days = Vec::with_capacity(test_days.len());
    let mut per_day = Vec::with_capacity(test_days.len());
    for data in test_days {
        let pairs = build_model_sets(bundle, dfs_cfg.model_set);
        let result = run_day(dfs_cfg, pairs, &data.context())?;
        let plant = &data.plant;
        per_day.push(DayMetrics {
            day: data.day_index,
            rmse_total_kw: rmse(&result.y_total_hat, &plant.y_total.values)?,
            rmse_ac_kw: rmse(&result.y_ac_hat, &plant.y_ac.values)?,
            rmse_ol_kw: rmse(&result.y_ol_hat, &plant.y_ol())?,
        });
        days.push((data.day_index, result));
    }
    Ok(ScenarioOutcome {
        days,
        metrics: Metrics::from_days(per_day)?,
    })
}

/// Writes `dfs_day_<d>.csv` and `weights_day_<d>.csv` for every day.
pub fn write_scenario_outputs(
    dir: &Path,
    outcome: &ScenarioOutcome,
    test_days: &[DayData],
) -> Result<()> {
    for ((day, result), data) in outcome.days.iter().zip(test_days) {
        csv_io::write_dfs_day(dir, *day, &data.plant, result)?;
        csv_io::write_weights_day(dir, *day, result)?;
    }
    Ok(())
}

/// Kalman benchmark results across the test days.
#[derive(Debug, Clone)]
pub struct KfOutcome {
    pub days: Vec<(usize, KfBankDay)>,
    pub bkf: MetricRange,
    pub akf: MetricRange,
}

/// Runs one Kalman filter per pair of the KF model set over every test day.
pub fn run_kf_benchmark(
    bundle: &ModelBundle,
    noise: &[NoiseEstimates],
    test_days: &[DayData],
) -> Result<KfOutcome> {
    let mut days = Vec::with_capacity(test_days.len());
    for data in test_days {
        let pairs = build_model_sets(bundle, crate::dfs::ModelSet::Kf);
        let bank = run_kf_bank(&pairs, noise, &data.context(), &data.plant.y_ac.values)?;
        days.push((data.day_index, bank));
    }
    let bkf = MetricRange::over(days.iter().map(|(_, b)| b.bkf_rmse_kw)).expect("nonempty");
    let akf = MetricRange::over(days.iter().map(|(_, b)| b.akf_rmse_kw)).expect("nonempty");
    Ok(KfOutcome { days, bkf, akf })
}
