//! Hysteretic thermostatically-controlled-load (TCL) population simulation.
//!
//! Each air conditioner is a first-order thermal system with a deadband
//! thermostat. With `a = exp(-dt / (R C))` the indoor air temperature follows
//!
//! ```text
//! theta[t+1] = a * theta[t] + (1 - a) * (T_out[t] - on[t] * R * COP * P_rated)
//! ```
//!
//! and the compressor switches on when `theta` rises above
//! `setpoint + deadband/2` and off when it falls below
//! `setpoint - deadband/2`. While on, the device draws a constant electric
//! power (rated power plus a small per-device offset).

use rand::Rng;

use crate::error::{Error, Result};
use crate::plant::PopulationSpec;
use crate::series::{TimeSeries, STEP_HOURS};

/// Electric-to-thermal conversion for the cooling term.
pub const COP: f64 = 3.0;

/// Physical parameters of one thermostatically controlled air conditioner.
#[derive(Debug, Clone, PartialEq)]
pub struct TclParams {
    /// Thermal resistance, °F per kW of thermal power.
    pub thermal_resistance: f64,
    /// Thermal capacitance, kWh per °F.
    pub thermal_capacitance: f64,
    /// Rated electric power draw while on, kW.
    pub rated_electric_power: f64,
    /// Thermostat setpoint, °F.
    pub setpoint: f64,
    /// Full deadband width, °F; switching occurs at `setpoint ± deadband/2`.
    pub deadband: f64,
    /// Indoor air temperature at step 0, °F.
    pub initial_air_temp: f64,
    /// Compressor state at step 0.
    pub initial_on: bool,
}

impl TclParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("thermal_resistance", self.thermal_resistance),
            ("thermal_capacitance", self.thermal_capacitance),
            ("rated_electric_power", self.rated_electric_power),
            ("setpoint", self.setpoint),
            ("deadband", self.deadband),
        ];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "TclParams.{name} must be strictly positive, got {v}"
                )));
            }
        }
        let lo = self.setpoint - self.deadband;
        let hi = self.setpoint + self.deadband;
        if !(self.initial_air_temp >= lo && self.initial_air_temp <= hi) {
            return Err(Error::InvalidInput(format!(
                "initial_air_temp {} outside [{lo}, {hi}]",
                self.initial_air_temp
            )));
        }
        Ok(())
    }

    /// Thermal cooling power transferred while the compressor runs, kW.
    pub fn cooling_power_kw(&self) -> f64 {
        COP * self.rated_electric_power
    }
}

/// One device of the simulated population: thermal parameters plus the
/// constant metered draw used for its power trace.
#[derive(Debug, Clone)]
pub struct TclDevice {
    pub params: TclParams,
    /// Metered electric draw while on, kW (rated power plus a seeded offset,
    /// times the plant calibration scale).
    pub draw_kw: f64,
}

/// On/off and power trace of a single device over a day.
#[derive(Debug, Clone)]
pub struct DeviceTrace {
    pub device_id: usize,
    pub on: Vec<bool>,
    pub power_kw: Vec<f64>,
}

impl DeviceTrace {
    pub fn validate(&self) -> Result<()> {
        if self.on.len() != self.power_kw.len() {
            return Err(Error::InvalidInput(format!(
                "device {} trace lengths differ: {} on vs {} power",
                self.device_id,
                self.on.len(),
                self.power_kw.len()
            )));
        }
        for (t, (&on, &p)) in self.on.iter().zip(&self.power_kw).enumerate() {
            if p < 0.0 || (!on && p != 0.0) {
                return Err(Error::InvalidInput(format!(
                    "device {} has inconsistent power {p} at step {t} (on={on})",
                    self.device_id
                )));
            }
        }
        Ok(())
    }
}

/// Samples the device population from the spec's parameter ranges.
///
/// Sampling consumes the RNG in device order, so the same spec and seed
/// always produce the same population regardless of how many days are later
/// simulated.
pub fn sample_devices<R: Rng>(spec: &PopulationSpec, rng: &mut R) -> Vec<TclDevice> {
    let t = &spec.tcl;
    (0..spec.n_ac)
        .map(|_| {
            let resistance = rng.random_range(t.resistance_f_per_kw.0..=t.resistance_f_per_kw.1);
            let capacitance = rng.random_range(t.capacitance_kwh_per_f.0..=t.capacitance_kwh_per_f.1)
                * t.capacitance_scale;
            let setpoint = rng.random_range(t.setpoint_f.0..=t.setpoint_f.1);
            let deadband = rng.random_range(t.deadband_f.0..=t.deadband_f.1);
            let rated = rng.random_range(t.rated_power_kw.0..=t.rated_power_kw.1);
            let offset = rng.random_range(-t.draw_offset_kw..=t.draw_offset_kw);
            let initial_air_temp =
                rng.random_range(setpoint - deadband / 2.0..=setpoint + deadband / 2.0);
            let initial_on = rng.random_bool(0.5);
            TclDevice {
                params: TclParams {
                    thermal_resistance: resistance,
                    thermal_capacitance: capacitance,
                    rated_electric_power: rated,
                    setpoint,
                    deadband,
                    initial_air_temp,
                    initial_on,
                },
                draw_kw: rated + offset,
            }
        })
        .collect()
}

/// Simulates a fixed device population against an outdoor temperature signal.
///
/// Returns the aggregate AC demand and the per-device traces. The aggregate
/// is accumulated in device order, so it is bit-reproducible.
pub fn simulate_devices(devices: &[TclDevice], temp: &TimeSeries) -> Result<(TimeSeries, Vec<DeviceTrace>)> {
    temp.expect_finite("outdoor temperature")?;
    let n = temp.len();
    let mut y_ac = vec![0.0; n];
    let mut traces = Vec::with_capacity(devices.len());
    for (id, dev) in devices.iter().enumerate() {
        dev.params.validate()?;
        let p = &dev.params;
        let a = (-STEP_HOURS / (p.thermal_resistance * p.thermal_capacitance)).exp();
        let gain = p.thermal_resistance * p.cooling_power_kw();
        let on_thresh = p.setpoint + p.deadband / 2.0;
        let off_thresh = p.setpoint - p.deadband / 2.0;

        let mut air = p.initial_air_temp;
        let mut on = p.initial_on;
        let mut on_seq = Vec::with_capacity(n);
        let mut pow_seq = Vec::with_capacity(n);
        for t in 0..n {
            on_seq.push(on);
            let draw = if on { dev.draw_kw } else { 0.0 };
            pow_seq.push(draw);
            y_ac[t] += draw;

            let target = temp.values[t] - if on { gain } else { 0.0 };
            air = a * air + (1.0 - a) * target;
            if air > on_thresh {
                on = true;
            } else if air < off_thresh {
                on = false;
            }
        }
        traces.push(DeviceTrace {
            device_id: id,
            on: on_seq,
            power_kw: pow_seq,
        });
    }
    Ok((TimeSeries::new(temp.start_step, y_ac), traces))
}

/// Samples a population from the spec and simulates it over one day of
/// outdoor temperature. Deterministic given `spec.seed`.
pub fn simulate_tcl_population(
    spec: &PopulationSpec,
    temp: &TimeSeries,
) -> Result<(TimeSeries, Vec<DeviceTrace>)> {
    spec.validate()?;
    temp.expect_day_length("outdoor temperature")?;
    let mut rng = spec.population_rng();
    let devices = sample_devices(spec, &mut rng);
    simulate_devices(&devices, temp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::PopulationSpec;
    use crate::series::STEPS_PER_DAY;

    fn flat_temp(value: f64) -> TimeSeries {
        TimeSeries::from_day(vec![value; STEPS_PER_DAY])
    }

    fn single_device(setpoint: f64, deadband: f64, initial_on: bool) -> TclDevice {
        TclDevice {
            params: TclParams {
                thermal_resistance: 2.0,
                thermal_capacitance: 1.25,
                rated_electric_power: 4.0,
                setpoint,
                deadband,
                initial_air_temp: setpoint,
                initial_on,
            },
            draw_kw: 4.0,
        }
    }

    #[test]
    fn cold_outdoors_shuts_everything_off() {
        let spec = PopulationSpec::downscaled(50, 40, 1.0, 7);
        // 50 °F is below every sampled setpoint minus its deadband.
        let (y_ac, traces) = simulate_tcl_population(&spec, &flat_temp(50.0)).unwrap();
        for trace in &traces {
            // At most one initial on-run, then off for the rest of the day.
            let first_off = trace.on.iter().position(|&o| !o).unwrap();
            assert!(trace.on[first_off..].iter().all(|&o| !o));
            assert!(first_off < 600, "device stuck on in cold weather");
        }
        let tail = &y_ac.values[600..];
        assert!(tail.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hot_constant_temperature_forces_cycling() {
        let dev = single_device(74.0, 2.0, false);
        // 90 °F: above the deadband, and cooling reaches 90 - 24 = 66 °F < 73.
        let (_, traces) = simulate_devices(&[dev], &flat_temp(90.0)).unwrap();
        let on = &traces[0].on;
        // Strictly alternating on/off runs after the initial transient.
        let mut switches = 0;
        for t in 1..on.len() {
            if on[t] != on[t - 1] {
                switches += 1;
            }
        }
        assert!(switches >= 4, "expected repeated cycling, got {switches} switches");
        let duty = on.iter().filter(|&&o| o).count() as f64 / on.len() as f64;
        assert!((0.0..=1.0).contains(&duty));
        assert!(duty > 0.05 && duty < 0.95);
    }

    #[test]
    fn aggregate_matches_independent_scalar_resimulation() {
        // Oracle: re-simulate every device step by step from the documented
        // recurrence, independently of `simulate_devices`.
        let spec = PopulationSpec::downscaled(550, 500, 1.0, 11);
        let mut temp = Vec::with_capacity(STEPS_PER_DAY);
        for t in 0..STEPS_PER_DAY {
            let h = t as f64 / 60.0;
            temp.push(92.0 + 8.0 * (std::f64::consts::TAU * (h - 16.0) / 24.0).cos());
        }
        let temp = TimeSeries::from_day(temp);

        let mut rng = spec.population_rng();
        let devices = sample_devices(&spec, &mut rng);
        let (y_ac, _) = simulate_devices(&devices, &temp).unwrap();

        let mut oracle = vec![0.0; STEPS_PER_DAY];
        for dev in &devices {
            let p = &dev.params;
            let a = (-STEP_HOURS / (p.thermal_resistance * p.thermal_capacitance)).exp();
            let mut air = p.initial_air_temp;
            let mut on = p.initial_on;
            for (t, slot) in oracle.iter_mut().enumerate() {
                if on {
                    *slot += dev.draw_kw;
                }
                let cool = if on {
                    p.thermal_resistance * COP * p.rated_electric_power
                } else {
                    0.0
                };
                air = a * air + (1.0 - a) * (temp.values[t] - cool);
                if air > p.setpoint + p.deadband / 2.0 {
                    on = true;
                } else if air < p.setpoint - p.deadband / 2.0 {
                    on = false;
                }
            }
        }
        let mean = y_ac.mean();
        let oracle_mean = oracle.iter().sum::<f64>() / oracle.len() as f64;
        assert!(
            (mean - oracle_mean).abs() <= 1e-9 * oracle_mean.abs().max(1.0),
            "mean {mean} vs oracle {oracle_mean}"
        );
    }

    #[test]
    fn rejects_non_finite_temperature() {
        let spec = PopulationSpec::downscaled(10, 8, 1.0, 3);
        let mut temp = flat_temp(80.0);
        temp.values[7] = f64::NAN;
        assert!(simulate_tcl_population(&spec, &temp).is_err());
    }

    #[test]
    fn hysteresis_switches_only_at_thresholds() {
        // Spec invariant: off->on transitions require air temp at or above
        // setpoint + db/2 - eps; on->off at or below setpoint - db/2 + eps.
        let spec = PopulationSpec::downscaled(40, 30, 1.0, 5);
        let temp = flat_temp(88.0);
        let mut rng = spec.population_rng();
        let devices = sample_devices(&spec, &mut rng);
        const EPS: f64 = 1e-9;
        for dev in &devices {
            let p = &dev.params;
            let a = (-STEP_HOURS / (p.thermal_resistance * p.thermal_capacitance)).exp();
            let mut air = p.initial_air_temp;
            let mut on = p.initial_on;
            for t in 0..STEPS_PER_DAY {
                let cool = if on { p.thermal_resistance * p.cooling_power_kw() } else { 0.0 };
                air = a * air + (1.0 - a) * (temp.values[t] - cool);
                let prev = on;
                if air > p.setpoint + p.deadband / 2.0 {
                    on = true;
                } else if air < p.setpoint - p.deadband / 2.0 {
                    on = false;
                }
                if !prev && on {
                    assert!(air >= p.setpoint + p.deadband / 2.0 - EPS);
                }
                if prev && !on {
                    assert!(air <= p.setpoint - p.deadband / 2.0 + EPS);
                }
            }
        }
    }

    #[test]
    fn duty_cycle_monotone_in_outdoor_temperature() {
        let spec = PopulationSpec::downscaled(60, 50, 1.0, 13);
        let mut rng = spec.population_rng();
        let devices = sample_devices(&spec, &mut rng);
        let duty = |temp_f: f64| {
            let (_, traces) = simulate_devices(&devices, &flat_temp(temp_f)).unwrap();
            let on: usize = traces.iter().map(|tr| tr.on.iter().filter(|&&o| o).count()).sum();
            on as f64 / (traces.len() * STEPS_PER_DAY) as f64
        };
        for base in [72.0, 78.0, 84.0, 90.0, 96.0] {
            assert!(
                duty(base + 5.0) >= duty(base) - 1e-12,
                "duty cycle decreased from {base} to {}",
                base + 5.0
            );
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = single_device(75.0, 1.0, false).params;
        p.deadband = 0.0;
        assert!(p.validate().is_err());
        let mut p2 = single_device(75.0, 1.0, false).params;
        p2.initial_air_temp = 80.0;
        assert!(p2.validate().is_err());
    }
}
