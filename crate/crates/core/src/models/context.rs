//! Runtime context handed to predictors.

use crate::error::{Error, Result};
use crate::series::Weekday;

/// Read-only view of one day's exogenous signals plus enough of the prior
/// day to serve lagged features.
///
/// `measured` is the total-demand stream; predictors only ever read index
/// `t - 1` when forming features for step `t`, which keeps the evaluation
/// causal. `temp_res_prev` is the chronological tail of the previous day's
/// residential temperature (its last sample is step `-1`).
#[derive(Debug, Clone, Copy)]
pub struct DayContext<'a> {
    pub weekday: Weekday,
    pub temp_res: &'a [f64],
    pub temp_com: &'a [f64],
    pub temp_res_prev: &'a [f64],
    /// Last measured total demand of the previous day (step `-1`).
    pub prev_total_last: Option<f64>,
    pub measured: &'a [f64],
}

impl<'a> DayContext<'a> {
    pub fn n_steps(&self) -> usize {
        self.measured.len()
    }

    /// Residential temperature at signed step index (negative indices read
    /// the previous day's tail).
    fn temp_res_signed(&self, idx: isize) -> Result<f64> {
        if idx >= 0 {
            self.temp_res
                .get(idx as usize)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("step {idx} beyond day length")))
        } else {
            let back = (-idx) as usize;
            if back > self.temp_res_prev.len() {
                return Err(Error::InsufficientHistory(format!(
                    "lagged temperature needs {back} steps before the day start, \
                     only {} available",
                    self.temp_res_prev.len()
                )));
            }
            Ok(self.temp_res_prev[self.temp_res_prev.len() - back])
        }
    }

    /// `T_res` at `t - lag`.
    pub fn lagged_temp_res(&self, t: usize, lag: usize) -> Result<f64> {
        self.temp_res_signed(t as isize - lag as isize)
    }

    /// Trailing mean of `T_res` over `[t - window, t - 1]`. Before a full
    /// window is available the mean of the available prefix is used; at the
    /// very first step with no history at all, the current sample stands in.
    pub fn moving_avg_temp_res(&self, t: usize, window: usize) -> f64 {
        let window = window.max(1);
        let lo = -(self.temp_res_prev.len() as isize);
        let start = (t as isize - window as isize).max(lo);
        let end = t as isize; // exclusive
        if start >= end {
            return self.temp_res[t.min(self.temp_res.len().saturating_sub(1))];
        }
        let mut sum = 0.0;
        let mut n = 0usize;
        for idx in start..end {
            // Indices in range by construction.
            sum += self.temp_res_signed(idx).expect("window index in range");
            n += 1;
        }
        sum / n as f64
    }

    /// Measured total demand at `t - 1`.
    pub fn prev_total(&self, t: usize) -> Result<f64> {
        if t == 0 {
            self.prev_total_last.ok_or_else(|| {
                Error::InsufficientHistory(
                    "previous-step total demand unavailable at the first step".into(),
                )
            })
        } else {
            Ok(self.measured[t - 1])
        }
    }

    /// Minute of day for step `t` (days are exactly one day long, so this is
    /// the identity for in-day steps).
    pub fn minute(&self, t: usize) -> usize {
        t % crate::series::STEPS_PER_DAY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(
        temp: &'a [f64],
        prev: &'a [f64],
        measured: &'a [f64],
        prev_total: Option<f64>,
    ) -> DayContext<'a> {
        DayContext {
            weekday: Weekday::Mon,
            temp_res: temp,
            temp_com: temp,
            temp_res_prev: prev,
            prev_total_last: prev_total,
            measured,
        }
    }

    #[test]
    fn lagged_temp_reads_into_previous_day() {
        let temp = [10.0, 11.0, 12.0];
        let prev = [7.0, 8.0, 9.0];
        let c = ctx(&temp, &prev, &temp, None);
        assert_eq!(c.lagged_temp_res(2, 0).unwrap(), 12.0);
        assert_eq!(c.lagged_temp_res(2, 2).unwrap(), 10.0);
        assert_eq!(c.lagged_temp_res(0, 1).unwrap(), 9.0);
        assert_eq!(c.lagged_temp_res(0, 3).unwrap(), 7.0);
        assert!(matches!(
            c.lagged_temp_res(0, 4),
            Err(Error::InsufficientHistory(_))
        ));
    }

    #[test]
    fn moving_average_uses_trailing_window_and_prefix_fallback() {
        let temp = [10.0, 20.0, 30.0, 40.0];
        let prev = [0.0, 2.0];
        let c = ctx(&temp, &prev, &temp, None);
        // Full window [t-2, t-1] at t=3: mean(20, 30).
        assert_eq!(c.moving_avg_temp_res(3, 2), 25.0);
        // At t=1 a window of 4 only has {0.0, 2.0, 10.0} available.
        assert_eq!(c.moving_avg_temp_res(1, 4), 4.0);
        // No history at all: current sample stands in.
        let c2 = ctx(&temp, &[], &temp, None);
        assert_eq!(c2.moving_avg_temp_res(0, 3), 10.0);
    }

    #[test]
    fn prev_total_at_step_zero_needs_history() {
        let temp = [1.0, 2.0];
        let meas = [100.0, 120.0];
        let c = ctx(&temp, &[], &meas, Some(90.0));
        assert_eq!(c.prev_total(0).unwrap(), 90.0);
        assert_eq!(c.prev_total(1).unwrap(), 100.0);
        let c2 = ctx(&temp, &[], &meas, None);
        assert!(matches!(
            c2.prev_total(0),
            Err(Error::InsufficientHistory(_))
        ));
    }
}
