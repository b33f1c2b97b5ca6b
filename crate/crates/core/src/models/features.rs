//! Regression feature construction.
//!
//! All three regression targets share a one-hot time-of-week indicator over
//! a seven-day week, binned at a configurable width:
//!
//! - residential OL: indicators, the residential temperature, and the
//!   previous step's measured total demand;
//! - commercial OL: indicators plus the commercial temperature times the
//!   indicators (a per-bin temperature slope);
//! - AC: indicators plus powers one through four of the lagged residential
//!   temperature.

use crate::error::{Error, Result};
use crate::models::context::DayContext;
use crate::series::{STEPS_PER_DAY, WEEK_MINUTES};

/// Which regression the features feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    OlRes,
    OlCom,
    Ac,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::OlRes => "ol_res",
            FeatureKind::OlCom => "ol_com",
            FeatureKind::Ac => "ac",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ol_res" => Some(FeatureKind::OlRes),
            "ol_com" => Some(FeatureKind::OlCom),
            "ac" => Some(FeatureKind::Ac),
            _ => None,
        }
    }
}

/// Feature layout: kind plus the indicator bin width and the temperature lag
/// (used by the AC features only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSpec {
    pub kind: FeatureKind,
    pub tow_bin_minutes: usize,
    pub lag_steps: usize,
}

impl FeatureSpec {
    pub fn new(kind: FeatureKind, tow_bin_minutes: usize, lag_steps: usize) -> Result<Self> {
        if tow_bin_minutes == 0 || WEEK_MINUTES % tow_bin_minutes != 0 {
            return Err(Error::InvalidInput(format!(
                "tow_bin_minutes must divide {WEEK_MINUTES}, got {tow_bin_minutes}"
            )));
        }
        Ok(Self {
            kind,
            tow_bin_minutes,
            lag_steps,
        })
    }

    /// Number of time-of-week indicator bins.
    pub fn n_tow_bins(&self) -> usize {
        WEEK_MINUTES / self.tow_bin_minutes
    }

    /// Total feature dimension.
    pub fn dim(&self) -> usize {
        let bins = self.n_tow_bins();
        match self.kind {
            FeatureKind::OlRes => bins + 2,
            FeatureKind::OlCom => 2 * bins,
            FeatureKind::Ac => bins + 4,
        }
    }

    fn tow_bin(&self, ctx: &DayContext, t: usize) -> usize {
        let minute_of_week = ctx.weekday.index() * STEPS_PER_DAY + ctx.minute(t);
        minute_of_week / self.tow_bin_minutes
    }

    /// Visits the nonzero feature entries for step `t` in index order.
    ///
    /// This is the single source of truth for the feature definitions; the
    /// dense [`build_features`] vector and the sparse dot product in the MLR
    /// predictor are both built on it.
    pub fn for_each_nonzero<F: FnMut(usize, f64)>(
        &self,
        t: usize,
        ctx: &DayContext,
        mut visit: F,
    ) -> Result<()> {
        let bins = self.n_tow_bins();
        let bin = self.tow_bin(ctx, t);
        match self.kind {
            FeatureKind::OlRes => {
                visit(bin, 1.0);
                visit(bins, ctx.temp_res[t]);
                visit(bins + 1, ctx.prev_total(t)?);
            }
            FeatureKind::OlCom => {
                visit(bin, 1.0);
                visit(bins + bin, ctx.temp_com[t]);
            }
            FeatureKind::Ac => {
                visit(bin, 1.0);
                let temp = ctx.lagged_temp_res(t, self.lag_steps)?;
                let mut power = 1.0;
                for k in 0..4 {
                    power *= temp;
                    visit(bins + k, power);
                }
            }
        }
        Ok(())
    }
}

/// Dense feature vector (mostly zeros away from the active indicator bin).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub spec: FeatureSpec,
}

/// Builds the dense feature vector for step `t`.
pub fn build_features(spec: &FeatureSpec, t: usize, ctx: &DayContext) -> Result<FeatureVector> {
    let mut values = vec![0.0; spec.dim()];
    spec.for_each_nonzero(t, ctx, |i, v| values[i] = v)?;
    Ok(FeatureVector { values, spec: *spec })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Weekday;

    fn ctx<'a>(
        weekday: Weekday,
        temp_res: &'a [f64],
        temp_com: &'a [f64],
        prev: &'a [f64],
        measured: &'a [f64],
    ) -> DayContext<'a> {
        DayContext {
            weekday,
            temp_res,
            temp_com,
            temp_res_prev: prev,
            prev_total_last: Some(500.0),
            measured,
        }
    }

    #[test]
    fn ol_res_indicator_is_one_hot_at_monday_midnight() {
        let temp = vec![70.0; STEPS_PER_DAY];
        let meas = vec![100.0; STEPS_PER_DAY];
        let spec = FeatureSpec::new(FeatureKind::OlRes, 1, 0).unwrap();
        let c = ctx(Weekday::Mon, &temp, &temp, &[], &meas);
        let fv = build_features(&spec, 0, &c).unwrap();
        assert_eq!(fv.values.len(), WEEK_MINUTES + 2);
        assert_eq!(fv.values[0], 1.0);
        assert_eq!(fv.values[1..WEEK_MINUTES].iter().filter(|&&v| v != 0.0).count(), 0);
        assert_eq!(fv.values[WEEK_MINUTES], 70.0);
        assert_eq!(fv.values[WEEK_MINUTES + 1], 500.0);
    }

    #[test]
    fn ac_features_are_temperature_powers_regardless_of_step() {
        let temp = vec![91.0; STEPS_PER_DAY];
        let prev = vec![91.0; 200];
        let meas = vec![100.0; STEPS_PER_DAY];
        let spec = FeatureSpec::new(FeatureKind::Ac, 15, 119).unwrap();
        let c = ctx(Weekday::Tue, &temp, &temp, &prev, &meas);
        let bins = spec.n_tow_bins();
        for t in [0, 100, 720, 1439] {
            let fv = build_features(&spec, t, &c).unwrap();
            let tail = &fv.values[bins..];
            let expect = [91.0, 91.0_f64.powi(2), 91.0_f64.powi(3), 91.0_f64.powi(4)];
            for (a, b) in tail.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ol_com_interaction_is_temperature_times_indicator() {
        let temp_res = vec![70.0; STEPS_PER_DAY];
        let temp_com = vec![82.5; STEPS_PER_DAY];
        let meas = vec![100.0; STEPS_PER_DAY];
        let spec = FeatureSpec::new(FeatureKind::OlCom, 15, 0).unwrap();
        let c = ctx(Weekday::Wed, &temp_res, &temp_com, &[], &meas);
        let bins = spec.n_tow_bins();
        let t = 300;
        let fv = build_features(&spec, t, &c).unwrap();
        for b in 0..bins {
            assert_eq!(fv.values[bins + b], temp_com[t] * fv.values[b]);
        }
    }

    #[test]
    fn missing_lag_history_is_an_explicit_error() {
        let temp = vec![91.0; STEPS_PER_DAY];
        let meas = vec![100.0; STEPS_PER_DAY];
        let spec = FeatureSpec::new(FeatureKind::Ac, 15, 119).unwrap();
        let c = ctx(Weekday::Tue, &temp, &temp, &[], &meas);
        match build_features(&spec, 10, &c) {
            Err(Error::InsufficientHistory(_)) => {}
            other => panic!("expected InsufficientHistory, got {other:?}"),
        }
    }

    #[test]
    fn bin_width_must_divide_the_week() {
        assert!(FeatureSpec::new(FeatureKind::OlRes, 13, 0).is_err());
        assert!(FeatureSpec::new(FeatureKind::OlRes, 0, 0).is_err());
        let spec = FeatureSpec::new(FeatureKind::OlRes, 15, 0).unwrap();
        assert_eq!(spec.n_tow_bins(), 672);
    }

    #[test]
    fn weekday_offsets_the_indicator_block() {
        let temp = vec![70.0; STEPS_PER_DAY];
        let meas = vec![100.0; STEPS_PER_DAY];
        let spec = FeatureSpec::new(FeatureKind::OlRes, 15, 0).unwrap();
        let c = ctx(Weekday::Thu, &temp, &temp, &[], &meas);
        let fv = build_features(&spec, 30, &c).unwrap();
        let expect_bin = (3 * STEPS_PER_DAY + 30) / 15;
        assert_eq!(fv.values[expect_bin], 1.0);
    }
}
