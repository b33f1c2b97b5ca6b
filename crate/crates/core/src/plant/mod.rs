//! Synthetic ground-truth feeder plant.
//!
//! The plant generates per-day feeder signals — aggregate AC demand of a
//! hysteretic air-conditioner population, residential and commercial other
//! load, and two regional temperature signals — together with per-device
//! traces. A mean-matching calibration scales the generator so that average
//! residential and commercial demand hit configured targets.
//!
//! Everything is a pure function of the population spec and the seed, so
//! identical inputs reproduce bit-identical output.

mod other_load;
mod tcl;
mod weather;

pub use other_load::{
    commercial_base_shape, commercial_occupancy, residential_base_shape, synth_ol, OlParams,
};
pub use tcl::{
    sample_devices, simulate_devices, simulate_tcl_population, DeviceTrace, TclDevice, TclParams,
    COP,
};
pub use weather::synth_weather;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::{TimeSeries, Weekday, STEPS_PER_DAY};

const STREAM_POPULATION: u64 = 1;
const STREAM_DAY_GAIN: u64 = 6;

/// Seeded generator for one named stream of the plant. Streams keep the
/// population draw independent of per-day noise draws.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-day seed for the OL noise processes.
fn day_seed(seed: u64, day_index: usize) -> u64 {
    seed.wrapping_add((day_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Sampling ranges for the TCL population (uniform per device).
#[derive(Debug, Clone, PartialEq)]
pub struct TclRanges {
    pub resistance_f_per_kw: (f64, f64),
    pub capacitance_kwh_per_f: (f64, f64),
    /// Applied to the sampled capacitance so natural time constants land in
    /// the 1–4 h range.
    pub capacitance_scale: f64,
    pub setpoint_f: (f64, f64),
    pub deadband_f: (f64, f64),
    pub rated_power_kw: (f64, f64),
    /// Half-width of the per-device metered-draw offset, kW.
    pub draw_offset_kw: f64,
    /// Half-width of the seeded per-day thermal-gain offset, °F. The offset
    /// shifts the temperature the devices are driven with but not the
    /// observed weather signal, standing in for solar, humidity and
    /// occupancy influences that weather sensors do not capture.
    pub day_gain_f: f64,
}

impl Default for TclRanges {
    fn default() -> Self {
        Self {
            resistance_f_per_kw: (1.5, 2.5),
            capacitance_kwh_per_f: (8.0, 12.0),
            capacitance_scale: 0.125,
            setpoint_f: (69.0, 77.0),
            deadband_f: (1.0, 2.0),
            rated_power_kw: (2.5, 4.5),
            draw_offset_kw: 0.15,
            day_gain_f: 1.5,
        }
    }
}

/// Everything needed to generate the synthetic feeder population.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub n_houses: usize,
    pub n_ac: usize,
    /// Target mean residential demand (AC plus residential OL), kW.
    pub target_res_mean_kw: f64,
    /// Target mean commercial demand, kW.
    pub target_com_mean_kw: f64,
    pub seed: u64,
    pub tcl: TclRanges,
    pub ol: OlParams,
}

impl PopulationSpec {
    /// Full-size feeder defaults: 2499 houses, 2269 air conditioners,
    /// 5.8 MW residential and 2.1 MW commercial mean demand.
    pub fn feeder_default(seed: u64) -> Self {
        Self {
            n_houses: 2499,
            n_ac: 2269,
            target_res_mean_kw: 5800.0,
            target_com_mean_kw: 2100.0,
            seed,
            tcl: TclRanges::default(),
            ol: OlParams::default(),
        }
    }

    /// A reduced population with targets scaled by the house ratio; keeps
    /// tests and examples cheap while preserving per-device behavior.
    pub fn downscaled(n_houses: usize, n_ac: usize, _reserved: f64, seed: u64) -> Self {
        let ratio = n_houses as f64 / 2499.0;
        Self {
            n_houses,
            n_ac,
            target_res_mean_kw: 5800.0 * ratio,
            target_com_mean_kw: 2100.0 * ratio,
            seed,
            tcl: TclRanges::default(),
            ol: OlParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ac > self.n_houses {
            return Err(Error::InvalidInput(format!(
                "n_ac ({}) exceeds n_houses ({})",
                self.n_ac, self.n_houses
            )));
        }
        if self.n_ac == 0 {
            return Err(Error::InvalidInput("population has zero devices".into()));
        }
        if self.target_res_mean_kw <= 0.0 || self.target_com_mean_kw <= 0.0 {
            return Err(Error::InvalidInput("demand targets must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn population_rng(&self) -> ChaCha8Rng {
        rng_for(self.seed, STREAM_POPULATION)
    }
}

/// Multiplicative calibration factors applied to the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantScale {
    /// Scale on the residential OL signal.
    pub res_ol_scale: f64,
    /// Scale on the commercial OL signal.
    pub com_scale: f64,
    /// Scale on per-device metered draw (thermal dynamics are unaffected, so
    /// the aggregate AC demand scales exactly linearly).
    pub ac_power_scale: f64,
}

impl PlantScale {
    pub fn identity() -> Self {
        Self {
            res_ol_scale: 1.0,
            com_scale: 1.0,
            ac_power_scale: 1.0,
        }
    }
}

/// Ground-truth signals of one simulated day.
#[derive(Debug, Clone)]
pub struct PlantDay {
    pub y_total: TimeSeries,
    pub y_ac: TimeSeries,
    pub y_ol_res: TimeSeries,
    pub y_ol_com: TimeSeries,
    pub temp_res: TimeSeries,
    pub temp_com: TimeSeries,
    pub day_of_week: Weekday,
}

impl PlantDay {
    /// Total other load (residential plus commercial).
    pub fn y_ol(&self) -> Vec<f64> {
        self.y_ol_res
            .values
            .iter()
            .zip(&self.y_ol_com.values)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Computes mean-matching calibration factors from a set of uncalibrated days.
///
/// Residential demand (AC + residential OL) is scaled by a single shared
/// factor, so the returned `res_ol_scale` and `ac_power_scale` are equal;
/// the commercial factor is independent.
pub fn calibrate_plant(spec: &PopulationSpec, uncalibrated: &[PlantDay]) -> Result<PlantScale> {
    if uncalibrated.is_empty() {
        return Err(Error::InvalidInput("calibration needs at least one day".into()));
    }
    let mut ac_sum = 0.0;
    let mut res_sum = 0.0;
    let mut com_sum = 0.0;
    let mut n = 0usize;
    for day in uncalibrated {
        ac_sum += day.y_ac.values.iter().sum::<f64>();
        res_sum += day.y_ol_res.values.iter().sum::<f64>();
        com_sum += day.y_ol_com.values.iter().sum::<f64>();
        n += day.y_ac.len();
    }
    let ac_mean = ac_sum / n as f64;
    let res_mean = res_sum / n as f64;
    let com_mean = com_sum / n as f64;
    if ac_mean + res_mean <= 0.0 {
        return Err(Error::DegenerateModel(
            "uncalibrated residential demand has zero mean".into(),
        ));
    }
    if com_mean <= 0.0 {
        return Err(Error::DegenerateModel(
            "uncalibrated commercial demand has zero mean".into(),
        ));
    }
    let res_factor = spec.target_res_mean_kw / (ac_mean + res_mean);
    Ok(PlantScale {
        res_ol_scale: res_factor,
        com_scale: spec.target_com_mean_kw / com_mean,
        ac_power_scale: res_factor,
    })
}

/// Days used to compute the calibration factors; test days start after them.
pub const CALIBRATION_DAYS: std::ops::RangeInclusive<usize> = 84..=90;

/// Calibrated plant generator. Samples the device population once and
/// produces any requested day on demand.
#[derive(Debug, Clone)]
pub struct PlantGenerator {
    spec: PopulationSpec,
    devices: Vec<TclDevice>,
    scale: PlantScale,
}

impl PlantGenerator {
    /// Builds an uncalibrated generator (identity scale).
    pub fn uncalibrated(spec: PopulationSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = spec.population_rng();
        let devices = sample_devices(&spec, &mut rng);
        Ok(Self {
            spec,
            devices,
            scale: PlantScale::identity(),
        })
    }

    /// Builds the generator and calibrates it on [`CALIBRATION_DAYS`].
    pub fn calibrated(spec: PopulationSpec) -> Result<Self> {
        let mut gen = Self::uncalibrated(spec)?;
        let days: Vec<PlantDay> = CALIBRATION_DAYS
            .map(|d| gen.day(d))
            .collect::<Result<_>>()?;
        let scale = calibrate_plant(&gen.spec, &days)?;
        gen.apply_scale(scale);
        Ok(gen)
    }

    pub fn apply_scale(&mut self, scale: PlantScale) {
        for dev in &mut self.devices {
            dev.draw_kw *= scale.ac_power_scale / self.scale.ac_power_scale;
        }
        self.scale = scale;
    }

    pub fn spec(&self) -> &PopulationSpec {
        &self.spec
    }

    pub fn scale(&self) -> PlantScale {
        self.scale
    }

    pub fn devices(&self) -> &[TclDevice] {
        &self.devices
    }

    /// Generates one day of ground truth. `y_total` is accumulated as
    /// `y_ac + y_ol_res + y_ol_com` per step, so the identity holds exactly.
    pub fn day(&self, day_index: usize) -> Result<PlantDay> {
        let (day, _) = self.day_with_traces_inner(day_index, false)?;
        Ok(day)
    }

    /// Generates one day together with the per-device traces.
    pub fn day_with_traces(&self, day_index: usize) -> Result<(PlantDay, Vec<DeviceTrace>)> {
        let (day, traces) = self.day_with_traces_inner(day_index, true)?;
        Ok((day, traces.expect("traces requested")))
    }

    /// Unobserved thermal-gain offset of one day, °F.
    pub fn day_gain(&self, day_index: usize) -> f64 {
        use rand::Rng;
        let half = self.spec.tcl.day_gain_f;
        if half == 0.0 {
            return 0.0;
        }
        let mut rng = rng_for(self.spec.seed, (STREAM_DAY_GAIN << 32) | day_index as u64);
        rng.random_range(-half..=half)
    }

    fn day_with_traces_inner(
        &self,
        day_index: usize,
        want_traces: bool,
    ) -> Result<(PlantDay, Option<Vec<DeviceTrace>>)> {
        let weekday = Weekday::from_day_index(day_index);
        let (temp_res, temp_com) = synth_weather(day_index, self.spec.seed);
        // Devices feel the observed temperature plus the day's unobserved
        // gain; models only ever see `temp_res`.
        let gain = self.day_gain(day_index);
        let mut temp_drive = temp_res.clone();
        for v in &mut temp_drive.values {
            *v += gain;
        }
        let (y_ac, traces) = simulate_devices(&self.devices, &temp_drive)?;
        let (mut y_ol_res, mut y_ol_com) = synth_ol(
            &self.spec,
            &temp_res,
            &temp_com,
            weekday,
            day_seed(self.spec.seed, day_index),
        )?;
        for v in &mut y_ol_res.values {
            *v *= self.scale.res_ol_scale;
        }
        for v in &mut y_ol_com.values {
            *v *= self.scale.com_scale;
        }
        let mut total = Vec::with_capacity(STEPS_PER_DAY);
        for t in 0..STEPS_PER_DAY {
            total.push(y_ac.values[t] + y_ol_res.values[t] + y_ol_com.values[t]);
        }
        let day = PlantDay {
            y_total: TimeSeries::from_day(total),
            y_ac,
            y_ol_res,
            y_ol_com,
            temp_res,
            temp_com,
            day_of_week: weekday,
        };
        Ok((day, if want_traces { Some(traces) } else { None }))
    }
}
