//! Aggregate two-state Markov-chain AC models, identified per temperature bin.
//!
//! The population state is `x = [fraction off, fraction drawing power]`. The
//! transition matrix `A` is a transposed Markov matrix (column = origin
//! state, `x[t+1] = A x[t]`), counted from per-device on/off events whose
//! lagged outdoor temperature falls in the bin `T_m - dT/2 <= T < T_m + dT/2`.
//! The output row is `C = n_ac * p_bar * [0 1]`, with `p_bar` the mean power
//! of devices that are drawing power in the bin.

use nalgebra::{Matrix2, RowVector2, Vector2};

use crate::error::{Error, Result};
use crate::plant::DeviceTrace;
use crate::series::TimeSeries;

/// Anomalous-measurement heuristic: on-samples below this power or above
/// three times the device's median on-power are excluded.
const MIN_ON_POWER_KW: f64 = 0.2;
const MAX_ON_POWER_MEDIAN_RATIO: f64 = 3.0;

const STOCHASTIC_TOL: f64 = 1e-12;

/// One temperature bin's aggregate model.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiModel {
    /// Transposed Markov transition matrix; columns sum to one.
    pub a: Matrix2<f64>,
    /// Bin center temperature, °F.
    pub bin_temp: f64,
    /// Mean power draw of devices that are drawing power, kW.
    pub p_bar: f64,
    /// Population size the output row scales to.
    pub n_ac: usize,
}

impl LtiModel {
    /// Output row mapping the state to aggregate demand, `[0, n_ac * p_bar]`.
    pub fn c(&self) -> RowVector2<f64> {
        RowVector2::new(0.0, self.n_ac as f64 * self.p_bar)
    }

    pub fn validate(&self) -> Result<()> {
        for col in 0..2 {
            let sum = self.a[(0, col)] + self.a[(1, col)];
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidInput(format!(
                    "column {col} of A sums to {sum}, expected 1"
                )));
            }
            for row in 0..2 {
                let v = self.a[(row, col)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "A[{row},{col}] = {v} outside [0, 1]"
                    )));
                }
            }
        }
        if self.p_bar < 0.0 {
            return Err(Error::InvalidInput(format!("p_bar = {} negative", self.p_bar)));
        }
        Ok(())
    }

    /// Stationary distribution of the chain (uniform when the chain never
    /// leaves its states).
    pub fn stationary(&self) -> Vector2<f64> {
        let to_on = self.a[(1, 0)];
        let to_off = self.a[(0, 1)];
        if to_on + to_off <= 0.0 {
            Vector2::new(0.5, 0.5)
        } else {
            let on = to_on / (to_on + to_off);
            Vector2::new(1.0 - on, on)
        }
    }
}

/// Advances a state through one step of the chain.
pub fn advance(state: &mut Vector2<f64>, a: &Matrix2<f64>) {
    *state = a * *state;
}

/// Bank of per-bin models over an evenly spaced temperature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiBank {
    /// Models ordered by bin temperature.
    pub models: Vec<LtiModel>,
    pub t_min: f64,
    pub t_max: f64,
    pub delta_t: f64,
}

impl LtiBank {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::InvalidInput("empty LTI bank".into()));
        }
        for (m, model) in self.models.iter().enumerate() {
            model.validate()?;
            let expect = self.t_min + m as f64 * self.delta_t;
            if (model.bin_temp - expect).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "bin {m} temperature {} not on the grid (expected {expect})",
                    model.bin_temp
                )));
            }
        }
        Ok(())
    }

    /// The model whose bin temperature is closest to `temp` (grid ends for
    /// out-of-range temperatures).
    pub fn closest(&self, temp: f64) -> &LtiModel {
        let idx = ((temp - self.t_min) / self.delta_t).round();
        let idx = idx.clamp(0.0, (self.models.len() - 1) as f64) as usize;
        &self.models[idx]
    }
}

#[derive(Clone, Default)]
struct BinCounts {
    /// transitions[origin][destination], origin/destination in {off=0, on=1}.
    transitions: [[f64; 2]; 2],
    power_sum: f64,
    power_count: f64,
}

/// Accumulates transition and power counts across any number of aligned
/// (traces, temperature) windows, then normalizes into a bank.
pub struct LtiBankBuilder {
    t_min: f64,
    t_max: f64,
    delta_t: f64,
    tau_l: usize,
    bins: Vec<BinCounts>,
    devices_seen: bool,
}

impl LtiBankBuilder {
    pub fn new(t_min: f64, t_max: f64, delta_t: f64, tau_l: usize) -> Result<Self> {
        if delta_t <= 0.0 || t_max < t_min {
            return Err(Error::InvalidInput(format!(
                "invalid grid: t_min {t_min}, t_max {t_max}, delta_t {delta_t}"
            )));
        }
        let n_bins = ((t_max - t_min) / delta_t).round() as usize + 1;
        Ok(Self {
            t_min,
            t_max,
            delta_t,
            tau_l,
            bins: vec![BinCounts::default(); n_bins],
            devices_seen: false,
        })
    }

    fn bin_of(&self, temp: f64) -> Option<usize> {
        let idx = ((temp - self.t_min) / self.delta_t + 0.5).floor();
        if idx < 0.0 || idx as usize >= self.bins.len() {
            return None;
        }
        let m = idx as usize;
        let center = self.t_min + m as f64 * self.delta_t;
        // Half-open bin [center - dT/2, center + dT/2).
        if temp >= center - self.delta_t / 2.0 && temp < center + self.delta_t / 2.0 {
            Some(m)
        } else {
            None
        }
    }

    /// Adds one aligned window.
    ///
    /// `temp_prev_tail` supplies the lagged temperature for the first `tau_l`
    /// steps; if it is too short those steps are skipped.
    pub fn add_window(
        &mut self,
        traces: &[DeviceTrace],
        temp: &[f64],
        temp_prev_tail: &[f64],
    ) -> Result<()> {
        if traces.is_empty() {
            return Err(Error::InvalidInput("no devices to identify from".into()));
        }
        let n = temp.len();
        let lagged = |t: usize| -> Option<f64> {
            if t >= self.tau_l {
                Some(temp[t - self.tau_l])
            } else {
                let back = self.tau_l - t;
                if back <= temp_prev_tail.len() {
                    Some(temp_prev_tail[temp_prev_tail.len() - back])
                } else {
                    None
                }
            }
        };
        for trace in traces {
            trace.validate()?;
            if trace.on.len() != n {
                return Err(Error::InvalidInput(format!(
                    "device {} trace length {} does not match temperature length {n}",
                    trace.device_id,
                    trace.on.len()
                )));
            }
            self.devices_seen = true;

            // Anomaly drops need the device's median on-power over this window.
            let mut on_powers: Vec<f64> = trace
                .on
                .iter()
                .zip(&trace.power_kw)
                .filter(|(&on, _)| on)
                .map(|(_, &p)| p)
                .collect();
            let median = if on_powers.is_empty() {
                0.0
            } else {
                on_powers.sort_by(|a, b| a.total_cmp(b));
                on_powers[on_powers.len() / 2]
            };
            let dropped = |t: usize| -> bool {
                trace.on[t]
                    && (trace.power_kw[t] < MIN_ON_POWER_KW
                        || trace.power_kw[t] > MAX_ON_POWER_MEDIAN_RATIO * median)
            };

            for t in 0..n {
                let Some(l) = lagged(t) else { continue };
                let Some(bin) = self.bin_of(l) else { continue };
                if dropped(t) {
                    continue;
                }
                if trace.on[t] {
                    self.bins[bin].power_sum += trace.power_kw[t];
                    self.bins[bin].power_count += 1.0;
                }
                if t + 1 < n && !dropped(t + 1) {
                    let from = trace.on[t] as usize;
                    let to = trace.on[t + 1] as usize;
                    self.bins[bin].transitions[from][to] += 1.0;
                }
            }
        }
        Ok(())
    }

    /// Normalizes counts into a bank. Bins with no transitions from a state
    /// get an identity column for that state; bins with no data at all are
    /// filled from the nearest populated bin (ties toward the lower bin).
    pub fn build(self, n_ac: usize) -> Result<LtiBank> {
        if !self.devices_seen {
            return Err(Error::InvalidInput("no devices to identify from".into()));
        }
        let n_bins = self.bins.len();
        let populated: Vec<bool> = self
            .bins
            .iter()
            .map(|b| b.transitions.iter().flatten().any(|&c| c > 0.0))
            .collect();
        let powered: Vec<bool> = self.bins.iter().map(|b| b.power_count > 0.0).collect();
        if !populated.iter().any(|&p| p) {
            return Err(Error::InvalidInput(
                "no transitions observed on the temperature grid".into(),
            ));
        }
        if !powered.iter().any(|&p| p) {
            return Err(Error::InvalidInput(
                "no on-power observed on the temperature grid".into(),
            ));
        }

        let nearest = |m: usize, ok: &[bool]| -> usize {
            if ok[m] {
                return m;
            }
            for d in 1..n_bins {
                if m >= d && ok[m - d] {
                    return m - d;
                }
                if m + d < n_bins && ok[m + d] {
                    return m + d;
                }
            }
            unreachable!("at least one populated bin exists");
        };

        let matrix_of = |bin: &BinCounts| -> Matrix2<f64> {
            let mut a = Matrix2::zeros();
            for from in 0..2 {
                let total = bin.transitions[from][0] + bin.transitions[from][1];
                if total > 0.0 {
                    a[(0, from)] = bin.transitions[from][0] / total;
                    a[(1, from)] = bin.transitions[from][1] / total;
                } else {
                    a[(from, from)] = 1.0;
                }
            }
            a
        };

        let mut models = Vec::with_capacity(n_bins);
        for m in 0..n_bins {
            let a = matrix_of(&self.bins[nearest(m, &populated)]);
            let src_p = &self.bins[nearest(m, &powered)];
            let p_bar = src_p.power_sum / src_p.power_count;
            models.push(LtiModel {
                a,
                bin_temp: self.t_min + m as f64 * self.delta_t,
                p_bar,
                n_ac,
            });
        }
        let bank = LtiBank {
            models,
            t_min: self.t_min,
            t_max: self.t_max,
            delta_t: self.delta_t,
        };
        bank.validate()?;
        Ok(bank)
    }
}

/// Identifies a bank from a single aligned window of traces and temperature.
pub fn identify_lti_bank(
    traces: &[DeviceTrace],
    temp: &TimeSeries,
    tau_l: usize,
    t_min: f64,
    t_max: f64,
    delta_t: f64,
    n_ac: usize,
) -> Result<LtiBank> {
    let mut builder = LtiBankBuilder::new(t_min, t_max, delta_t, tau_l)?;
    builder.add_window(traces, &temp.values, &[])?;
    builder.build(n_ac)
}
