//! Time-of-day lookup models.
//!
//! A TOD model smooths one historical day into a continuous piecewise-linear
//! curve with one segment per 15-minute interval (96 segments, 97 knots) and
//! serves the smoothed value as the prediction for the same minute of any
//! later day.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::series::{TimeSeries, Weekday, STEPS_PER_DAY};

/// Minutes per linear segment.
pub const SEGMENT_MINUTES: usize = 15;
const N_KNOTS: usize = STEPS_PER_DAY / SEGMENT_MINUTES + 1;

/// Per-minute lookup table for one weekday.
#[derive(Debug, Clone, PartialEq)]
pub struct TodModel {
    /// Predicted demand for each minute of the day, kW.
    pub alpha: Vec<f64>,
    pub label: Weekday,
}

impl TodModel {
    pub fn predict(&self, minute: usize) -> f64 {
        self.alpha[minute % STEPS_PER_DAY]
    }
}

/// Fits the continuous piecewise-linear least-squares smoother to one prior
/// day and tabulates it per minute.
///
/// The curve is parameterized by its knot values `v_0..v_96`; minute `k` in
/// segment `j = k / 15` with fraction `u = (k mod 15) / 15` evaluates to
/// `(1-u) v_j + u v_{j+1}`. The knot values solve the normal equations of
/// the least-squares problem, which makes the fit optimal among all
/// continuous piecewise-linear curves with these knots.
pub fn fit_tod(history: &TimeSeries, weekday: Weekday) -> Result<TodModel> {
    if history.len() != STEPS_PER_DAY {
        return Err(Error::InvalidInput(format!(
            "TOD history must be {STEPS_PER_DAY} samples, got {}",
            history.len()
        )));
    }
    history.expect_finite("TOD history")?;

    let mut xtx = DMatrix::<f64>::zeros(N_KNOTS, N_KNOTS);
    let mut xty = DVector::<f64>::zeros(N_KNOTS);
    for k in 0..STEPS_PER_DAY {
        let j = k / SEGMENT_MINUTES;
        let u = (k % SEGMENT_MINUTES) as f64 / SEGMENT_MINUTES as f64;
        let w0 = 1.0 - u;
        let y = history.values[k];
        xtx[(j, j)] += w0 * w0;
        xtx[(j, j + 1)] += w0 * u;
        xtx[(j + 1, j)] += w0 * u;
        xtx[(j + 1, j + 1)] += u * u;
        xty[j] += w0 * y;
        xty[j + 1] += u * y;
    }
    let chol = Cholesky::new(xtx)
        .ok_or_else(|| Error::SingularSystem("TOD normal equations not positive definite".into()))?;
    let knots = chol.solve(&xty);

    let mut alpha = Vec::with_capacity(STEPS_PER_DAY);
    for k in 0..STEPS_PER_DAY {
        let j = k / SEGMENT_MINUTES;
        let u = (k % SEGMENT_MINUTES) as f64 / SEGMENT_MINUTES as f64;
        alpha.push((1.0 - u) * knots[j] + u * knots[j + 1]);
    }
    Ok(TodModel { alpha, label: weekday })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_day(values)
    }

    #[test]
    fn constant_day_is_reproduced_exactly() {
        let model = fit_tod(&day(vec![100.0; STEPS_PER_DAY]), Weekday::Mon).unwrap();
        for &a in &model.alpha {
            assert!((a - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn representable_signal_is_reproduced() {
        // Continuous piecewise-linear with knots on 15-min boundaries.
        let knots: Vec<f64> = (0..N_KNOTS).map(|j| 50.0 + 10.0 * (j as f64 * 0.3).sin()).collect();
        let mut values = Vec::with_capacity(STEPS_PER_DAY);
        for k in 0..STEPS_PER_DAY {
            let j = k / SEGMENT_MINUTES;
            let u = (k % SEGMENT_MINUTES) as f64 / SEGMENT_MINUTES as f64;
            values.push((1.0 - u) * knots[j] + u * knots[j + 1]);
        }
        let signal = day(values.clone());
        let model = fit_tod(&signal, Weekday::Tue).unwrap();
        for (a, v) in model.alpha.iter().zip(&values) {
            assert!((a - v).abs() <= 1e-8, "{a} vs {v}");
        }
    }

    #[test]
    fn fit_matches_dense_normal_equations_oracle() {
        // Oracle: build the dense 1440 x 97 design matrix and solve the
        // normal equations with a full LU decomposition, then compare
        // residual sums of squares.
        let values: Vec<f64> = (0..STEPS_PER_DAY)
            .map(|k| {
                let x = k as f64 / STEPS_PER_DAY as f64;
                200.0 + 40.0 * (std::f64::consts::TAU * x).sin()
                    + 5.0 * ((k as f64 * 12.9898).sin() * 43758.5453).fract()
            })
            .collect();
        let signal = day(values.clone());
        let model = fit_tod(&signal, Weekday::Wed).unwrap();

        let mut design = DMatrix::<f64>::zeros(STEPS_PER_DAY, N_KNOTS);
        for k in 0..STEPS_PER_DAY {
            let j = k / SEGMENT_MINUTES;
            let u = (k % SEGMENT_MINUTES) as f64 / SEGMENT_MINUTES as f64;
            design[(k, j)] = 1.0 - u;
            design[(k, j + 1)] = u;
        }
        let y = DVector::from_vec(values.clone());
        let xtx = design.transpose() * &design;
        let xty = design.transpose() * &y;
        let knots = xtx.lu().solve(&xty).expect("oracle solve");
        let oracle_pred = design * knots;

        let rss_model: f64 = model
            .alpha
            .iter()
            .zip(&values)
            .map(|(a, v)| (a - v) * (a - v))
            .sum();
        let rss_oracle: f64 = oracle_pred
            .iter()
            .zip(&values)
            .map(|(a, v)| (a - v) * (a - v))
            .sum();
        assert!(
            rss_model <= rss_oracle + 1e-6,
            "model RSS {rss_model} vs oracle RSS {rss_oracle}"
        );
    }

    #[test]
    fn shift_invariance_of_least_squares() {
        let values: Vec<f64> = (0..STEPS_PER_DAY)
            .map(|k| 150.0 + 30.0 * (k as f64 / 200.0).sin())
            .collect();
        let base = fit_tod(&day(values.clone()), Weekday::Thu).unwrap();
        let shifted: Vec<f64> = values.iter().map(|v| v + 500.0).collect();
        let shifted_fit = fit_tod(&day(shifted), Weekday::Thu).unwrap();
        for (a, b) in base.alpha.iter().zip(&shifted_fit.alpha) {
            assert!((a + 500.0 - b).abs() < 1e-7);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(fit_tod(&day(vec![1.0; 100]), Weekday::Fri).is_err());
    }

    #[test]
    fn prediction_is_a_lookup() {
        let values: Vec<f64> = (0..STEPS_PER_DAY).map(|k| k as f64).collect();
        let model = fit_tod(&day(values), Weekday::Mon).unwrap();
        for minute in [0, 17, 719, 1439] {
            assert_eq!(model.predict(minute), model.alpha[minute]);
        }
    }
}
