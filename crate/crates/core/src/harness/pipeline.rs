//! Train/test orchestration: history windows, bundle fitting, noise
//! estimation and per-day input assembly.
//!
//! Day indices form a rolling synthetic calendar (weekday = index mod 5).
//! For a test block starting at day `T0`:
//!
//! - device traces from the 90 days before `T0` identify the LTI bank,
//! - the 40 days before `T0` fit the regressions and the temperature lags,
//! - the 5 days before `T0` provide one time-of-day model per weekday,
//! - the 7 days before `T0` estimate the Kalman noise covariances.
//!
//! Plant calibration uses a fixed earlier week, so test days start at 91.

use crate::error::{Error, Result};
use crate::harness::bundle::{build_model_sets, ModelBundle};
use crate::harness::config::ScenarioConfig;
use crate::kalman::{estimate_q, estimate_r, NoiseDay, NoiseEstimates};
use crate::models::{
    estimate_lag, fit_mlr, fit_tod, DayContext, FeatureKind, FeatureSpec, LagMode, LtiBankBuilder,
    TodModel, TrainingDay, DEFAULT_GRID_MAX_F, DEFAULT_GRID_MIN_F, DEFAULT_GRID_STEP_F,
};
use crate::plant::{PlantDay, PlantGenerator};
use crate::series::Weekday;

pub const LTI_WINDOW_DAYS: usize = 90;
pub const MLR_WINDOW_DAYS: usize = 40;
pub const NOISE_WINDOW_DAYS: usize = 7;
/// Earliest usable test day (history windows plus the calibration week).
pub const MIN_TEST_DAY: usize = 91;
/// Previous-day temperature tail kept for lagged features, steps.
pub const HISTORY_TAIL_STEPS: usize = 480;
/// Search ranges for the temperature lag estimates, steps.
pub const MAX_LAG_STEPS: usize = 360;
pub const MAX_WINDOW_STEPS: usize = 480;

/// One day's signals plus the previous-day tails needed by lagged features.
#[derive(Debug, Clone)]
pub struct DayData {
    pub day_index: usize,
    pub plant: PlantDay,
    pub temp_res_prev: Vec<f64>,
    pub prev_total_last: f64,
}

impl DayData {
    /// Generates the day and the tail of the day before it.
    pub fn load(gen: &PlantGenerator, day_index: usize) -> Result<Self> {
        if day_index == 0 {
            return Err(Error::InvalidInput(
                "day 0 has no previous day to serve lagged features".into(),
            ));
        }
        let prev = gen.day(day_index - 1)?;
        let plant = gen.day(day_index)?;
        let n = prev.temp_res.len();
        let tail = prev.temp_res.values[n - HISTORY_TAIL_STEPS.min(n)..].to_vec();
        Ok(Self {
            day_index,
            plant,
            temp_res_prev: tail,
            prev_total_last: *prev.y_total.values.last().expect("nonempty day"),
        })
    }

    /// Context over the measured total-demand stream.
    pub fn context(&self) -> DayContext<'_> {
        DayContext {
            weekday: self.plant.day_of_week,
            temp_res: &self.plant.temp_res.values,
            temp_com: &self.plant.temp_com.values,
            temp_res_prev: &self.temp_res_prev,
            prev_total_last: Some(self.prev_total_last),
            measured: &self.plant.y_total.values,
        }
    }
}

/// Generates the configured test days.
pub fn load_test_days(gen: &PlantGenerator, days: &[usize]) -> Result<Vec<DayData>> {
    days.iter().map(|&d| DayData::load(gen, d)).collect()
}

fn first_test_day(cfg: &ScenarioConfig) -> Result<usize> {
    let t0 = *cfg.days.iter().min().expect("validated nonempty");
    if t0 < MIN_TEST_DAY {
        return Err(Error::InvalidInput(format!(
            "test days must start at {MIN_TEST_DAY} or later (got {t0}); earlier days \
             are reserved for history and plant calibration"
        )));
    }
    Ok(t0)
}

/// Identifies the full model bundle from the history preceding the test block.
pub fn fit_bundle(cfg: &ScenarioConfig, gen: &PlantGenerator) -> Result<ModelBundle> {
    let t0 = first_test_day(cfg)?;

    // Regression-window days, oldest first.
    let mlr_days: Vec<DayData> = (t0 - MLR_WINDOW_DAYS..t0)
        .map(|d| DayData::load(gen, d))
        .collect::<Result<_>>()?;

    // Temperature lags from the concatenated window.
    let mut ac_hist = Vec::with_capacity(mlr_days.len() * 1440);
    let mut temp_hist = Vec::with_capacity(mlr_days.len() * 1440);
    for day in &mlr_days {
        ac_hist.extend_from_slice(&day.plant.y_ac.values);
        temp_hist.extend_from_slice(&day.plant.temp_res.values);
    }
    let tau_l = estimate_lag(&ac_hist, &temp_hist, MAX_LAG_STEPS, LagMode::Lagged)?;
    let tau_w = estimate_lag(&ac_hist, &temp_hist, MAX_WINDOW_STEPS, LagMode::MovingAvg)?;

    // LTI bank from per-device traces, one day at a time.
    let mut builder = LtiBankBuilder::new(
        DEFAULT_GRID_MIN_F,
        DEFAULT_GRID_MAX_F,
        DEFAULT_GRID_STEP_F,
        tau_l,
    )?;
    for d in t0 - LTI_WINDOW_DAYS..t0 {
        let prev = gen.day(d - 1)?;
        let n = prev.temp_res.len();
        let tail = &prev.temp_res.values[n - HISTORY_TAIL_STEPS.min(n)..];
        let (day, traces) = gen.day_with_traces(d)?;
        builder.add_window(&traces, &day.temp_res.values, tail)?;
    }
    let lti = builder.build(gen.spec().n_ac)?;

    // Regressions.
    let ol_res_spec = FeatureSpec::new(FeatureKind::OlRes, cfg.tow_bin_minutes, 0)?;
    let ol_com_spec = FeatureSpec::new(FeatureKind::OlCom, cfg.tow_bin_minutes, 0)?;
    let ac_spec = FeatureSpec::new(FeatureKind::Ac, cfg.tow_bin_minutes, tau_l)?;
    let training = |target: fn(&PlantDay) -> Vec<f64>| -> Vec<(DayContext<'_>, Vec<f64>)> {
        mlr_days
            .iter()
            .map(|d| (d.context(), target(&d.plant)))
            .collect()
    };
    let fit = |spec: &FeatureSpec, data: &[(DayContext<'_>, Vec<f64>)]| {
        let days: Vec<TrainingDay<'_>> = data
            .iter()
            .map(|(ctx, target)| TrainingDay {
                ctx: *ctx,
                target,
            })
            .collect();
        fit_mlr(&days, spec, cfg.ridge)
    };
    let res_data = training(|p| p.y_ol_res.values.clone());
    let com_data = training(|p| p.y_ol_com.values.clone());
    let ac_data = training(|p| p.y_ac.values.clone());
    let ol_res = fit(&ol_res_spec, &res_data)?;
    let ol_com = fit(&ol_com_spec, &com_data)?;
    let ac_mlr = fit(&ac_spec, &ac_data)?;

    // One time-of-day model per weekday from the immediately preceding week.
    let mut tod: Vec<Option<TodModel>> = vec![None; 5];
    for d in t0 - 5..t0 {
        let day = gen.day(d)?;
        let weekday = Weekday::from_day_index(d);
        let ol = crate::series::TimeSeries::from_day(day.y_ol());
        tod[weekday.index()] = Some(fit_tod(&ol, weekday)?);
    }
    let tod: Vec<TodModel> = tod
        .into_iter()
        .map(|m| m.expect("five consecutive days cover every weekday"))
        .collect();

    Ok(ModelBundle {
        tod,
        ol_res,
        ol_com,
        ac_mlr,
        lti,
        tau_l,
        tau_w,
    })
}

/// Noise estimates for the Kalman bank, one per pair, aligned with
/// `build_model_sets(bundle, ModelSet::Kf)`.
pub fn estimate_noise(
    cfg: &ScenarioConfig,
    gen: &PlantGenerator,
    bundle: &ModelBundle,
) -> Result<Vec<NoiseEstimates>> {
    let t0 = first_test_day(cfg)?;
    let noise_days: Vec<DayData> = (t0 - NOISE_WINDOW_DAYS..t0)
        .map(|d| DayData::load(gen, d))
        .collect::<Result<_>>()?;
    let ol_true: Vec<Vec<f64>> = noise_days.iter().map(|d| d.plant.y_ol()).collect();
    let days: Vec<NoiseDay<'_>> = noise_days
        .iter()
        .zip(&ol_true)
        .map(|(d, ol)| NoiseDay {
            ctx: d.context(),
            y_ac: &d.plant.y_ac.values,
            y_ol: ol,
        })
        .collect();

    let ac_models = bundle.ac_models(crate::dfs::ModelSet::Kf);
    let ol_models = bundle.ol_models();
    let mut q_by_ac = Vec::with_capacity(ac_models.len());
    for (_, ac) in &ac_models {
        q_by_ac.push(estimate_q(ac, &days)?);
    }
    let mut r_by_ol = Vec::with_capacity(ol_models.len());
    for (_, ol) in &ol_models {
        r_by_ol.push(estimate_r(ol, &days)?);
    }

    let mut out = Vec::with_capacity(ac_models.len() * ol_models.len());
    for (i, (ac_id, _)) in ac_models.iter().enumerate() {
        for (j, (ol_id, _)) in ol_models.iter().enumerate() {
            out.push(NoiseEstimates {
                q: q_by_ac[i],
                r: r_by_ol[j],
                source_pair: crate::models::PairId {
                    ac: *ac_id,
                    ol: *ol_id,
                },
            });
        }
    }
    debug_assert_eq!(out.len(), build_model_sets(bundle, crate::dfs::ModelSet::Kf).len());
    Ok(out)
}
