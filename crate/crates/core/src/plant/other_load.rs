//! Synthetic non-AC ("other load") demand signals.
//!
//! Residential OL is a smooth double-peak daily base (two-harmonic periodic
//! basis) plus a cooling-degree temperature term and AR(1) noise. Commercial
//! OL is an occupancy trapezoid (ramp 6–9 AM, plateau, ramp down 5–9 PM)
//! plus a temperature-occupancy interaction and AR(1) noise. Both are
//! deterministic given the seed and clamped at zero.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::plant::{rng_for, PopulationSpec};
use crate::series::{TimeSeries, Weekday, STEPS_PER_DAY};

const STREAM_OL_RES: u64 = 4;
const STREAM_OL_COM: u64 = 5;

/// Per-weekday demand factors, Monday first.
const RES_WEEKDAY_FACTOR: [f64; 5] = [1.00, 0.97, 1.02, 0.99, 1.03];
const COM_WEEKDAY_FACTOR: [f64; 5] = [1.00, 1.00, 0.98, 1.01, 0.99];

/// Shape parameters of the synthetic OL processes.
#[derive(Debug, Clone, PartialEq)]
pub struct OlParams {
    /// Mean residential OL per house, kW.
    pub res_level_kw_per_house: f64,
    /// Residential temperature sensitivity, kW per house per °F above 65 °F.
    pub res_temp_coef_kw_per_house: f64,
    /// Stationary noise standard deviation as a fraction of the residential level.
    pub res_noise_frac: f64,
    /// Commercial temperature sensitivity as a fraction of the commercial
    /// level per °F above 60 °F, active during occupied hours.
    pub com_temp_coef_frac_per_f: f64,
    /// Stationary noise standard deviation as a fraction of the commercial level.
    pub com_noise_frac: f64,
    /// AR(1) coefficient of both noise processes.
    pub noise_rho: f64,
}

impl Default for OlParams {
    fn default() -> Self {
        Self {
            res_level_kw_per_house: 1.8,
            res_temp_coef_kw_per_house: 0.004,
            res_noise_frac: 0.02,
            com_temp_coef_frac_per_f: 0.004,
            com_noise_frac: 0.02,
            noise_rho: 0.9995,
        }
    }
}

/// Normalized residential daily shape (mean 1.0): overnight trough near
/// 3 AM, a modest morning shoulder and a dominant evening peak.
pub fn residential_base_shape(minute: usize) -> f64 {
    let w = std::f64::consts::TAU * minute as f64 / STEPS_PER_DAY as f64;
    1.0 - 0.0466 * w.cos() - 0.1924 * w.sin() - 0.0709 * (2.0 * w).cos() - 0.1722 * (2.0 * w).sin()
}

/// Commercial occupancy trapezoid: 0.6 overnight, ramping to 1.4 between
/// 6 and 9 AM, plateau until 5 PM, ramping back down by 9 PM.
pub fn commercial_base_shape(minute: usize) -> f64 {
    const LOW: f64 = 0.6;
    const HIGH: f64 = 1.4;
    let m = minute as f64;
    if m < 360.0 {
        LOW
    } else if m < 540.0 {
        LOW + (HIGH - LOW) * (m - 360.0) / 180.0
    } else if m < 1020.0 {
        HIGH
    } else if m < 1260.0 {
        HIGH - (HIGH - LOW) * (m - 1020.0) / 240.0
    } else {
        LOW
    }
}

/// Occupied fraction implied by the trapezoid, in [0, 1].
pub fn commercial_occupancy(minute: usize) -> f64 {
    (commercial_base_shape(minute) - 0.6) / 0.8
}

fn ar1_noise<R: Rng>(rng: &mut R, sigma: f64, rho: f64, n: usize) -> Vec<f64> {
    let innovation = sigma * (1.0 - rho * rho).max(0.0).sqrt();
    let mut out = Vec::with_capacity(n);
    let mut state = sigma * rng.sample::<f64, _>(StandardNormal);
    for _ in 0..n {
        out.push(state);
        state = rho * state + innovation * rng.sample::<f64, _>(StandardNormal);
    }
    out
}

/// Generates the residential and commercial OL signals for one day.
///
/// `seed` should already encode the day so that consecutive days draw
/// different noise; the plant generator derives it from the population seed
/// and the day index.
pub fn synth_ol(
    spec: &PopulationSpec,
    temp_res: &TimeSeries,
    temp_com: &TimeSeries,
    day_of_week: Weekday,
    seed: u64,
) -> Result<(TimeSeries, TimeSeries)> {
    temp_res.expect_day_length("temp_res")?;
    temp_com.expect_day_length("temp_com")?;
    temp_res.expect_finite("temp_res")?;
    temp_com.expect_finite("temp_com")?;

    let ol = &spec.ol;
    let res_level = ol.res_level_kw_per_house * spec.n_houses as f64;
    let com_level = spec.target_com_mean_kw;
    let wf_res = RES_WEEKDAY_FACTOR[day_of_week.index()];
    let wf_com = COM_WEEKDAY_FACTOR[day_of_week.index()];

    let mut rng_res = rng_for(seed, STREAM_OL_RES);
    let mut rng_com = rng_for(seed, STREAM_OL_COM);
    let noise_res = ar1_noise(&mut rng_res, ol.res_noise_frac * res_level, ol.noise_rho, STEPS_PER_DAY);
    let noise_com = ar1_noise(&mut rng_com, ol.com_noise_frac * com_level, ol.noise_rho, STEPS_PER_DAY);

    let mut y_res = Vec::with_capacity(STEPS_PER_DAY);
    let mut y_com = Vec::with_capacity(STEPS_PER_DAY);
    for k in 0..STEPS_PER_DAY {
        let base = res_level * wf_res * residential_base_shape(k);
        let temp_term = ol.res_temp_coef_kw_per_house
            * spec.n_houses as f64
            * (temp_res.values[k] - 65.0).max(0.0);
        y_res.push((base + temp_term + noise_res[k]).max(0.0));

        let base = com_level * wf_com * commercial_base_shape(k);
        let temp_term = ol.com_temp_coef_frac_per_f
            * com_level
            * (temp_com.values[k] - 60.0).max(0.0)
            * commercial_occupancy(k);
        y_com.push((base + temp_term + noise_com[k]).max(0.0));
    }
    Ok((TimeSeries::from_day(y_res), TimeSeries::from_day(y_com)))
}
