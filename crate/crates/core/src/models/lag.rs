//! Temperature lag estimation by cross-correlation.

use crate::error::{Error, Result};

/// How the effective temperature is formed from the raw signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagMode {
    /// Use the sample from `tau` steps ago.
    Lagged,
    /// Use the trailing mean over the last `tau` steps.
    MovingAvg,
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return Err(Error::DegenerateModel(
            "correlation undefined for a constant signal".into(),
        ));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Finds the lag (or trailing-window length) that maximizes the Pearson
/// correlation between the demand signal and the (transformed) temperature.
///
/// All candidates are scored on the common sample range `t in [max_lag, n)`,
/// so scores are comparable across lags. Ties break toward the smaller lag.
/// In `MovingAvg` mode the window `[t - tau, t - 1]` is used and candidates
/// start at `tau = 1`.
pub fn estimate_lag(demand: &[f64], temp: &[f64], max_lag: usize, mode: LagMode) -> Result<usize> {
    if demand.len() != temp.len() {
        return Err(Error::InvalidInput(format!(
            "demand and temperature lengths differ: {} vs {}",
            demand.len(),
            temp.len()
        )));
    }
    if demand.len() <= max_lag + 1 {
        return Err(Error::InvalidInput(format!(
            "history of {} samples too short for max lag {max_lag}",
            demand.len()
        )));
    }
    let n = demand.len();
    let window = &demand[max_lag..];

    let mut best_tau = None;
    let mut best_corr = f64::NEG_INFINITY;
    match mode {
        LagMode::Lagged => {
            for tau in 0..=max_lag {
                let shifted = &temp[max_lag - tau..n - tau];
                let corr = pearson(window, shifted)?;
                if corr > best_corr {
                    best_corr = corr;
                    best_tau = Some(tau);
                }
            }
        }
        LagMode::MovingAvg => {
            // Prefix sums make each candidate window O(n).
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            for &v in temp {
                prefix.push(prefix.last().unwrap() + v);
            }
            for tau in 1..=max_lag {
                let means: Vec<f64> = (max_lag..n)
                    .map(|t| (prefix[t] - prefix[t - tau]) / tau as f64)
                    .collect();
                let corr = pearson(window, &means)?;
                if corr > best_corr {
                    best_corr = corr;
                    best_tau = Some(tau);
                }
            }
        }
    }
    best_tau.ok_or_else(|| Error::InvalidInput("no lag candidates".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth_temp(n: usize) -> Vec<f64> {
        (0..n)
            .map(|t| {
                88.0 + 9.0 * (std::f64::consts::TAU * t as f64 / 1440.0).sin()
                    + 2.0 * (t as f64 / 311.0).sin()
            })
            .collect()
    }

    #[test]
    fn recovers_a_constructed_shift() {
        let temp = smooth_temp(4000);
        let demand: Vec<f64> = (0..4000)
            .map(|t| if t >= 5 { temp[t - 5] + 100.0 } else { 100.0 })
            .collect();
        assert_eq!(estimate_lag(&demand, &temp, 60, LagMode::Lagged).unwrap(), 5);
    }

    #[test]
    fn zero_lag_when_demand_equals_temperature() {
        let temp = smooth_temp(3000);
        assert_eq!(estimate_lag(&temp, &temp, 60, LagMode::Lagged).unwrap(), 0);
    }

    #[test]
    fn finds_the_single_positive_spike() {
        // Demand built so correlation is negative at every lag except 12.
        let n = 5000;
        let noise: Vec<f64> = (0..n + 40)
            .map(|t| ((t as f64 * 12.9898).sin() * 43758.5453).fract() - 0.5)
            .collect();
        let temp = noise[..n].to_vec();
        let mut demand = vec![0.0; n];
        for t in 30..n {
            let mut anti = 0.0;
            for tau in 0..25 {
                if tau != 12 {
                    anti += temp[t - tau];
                }
            }
            demand[t] = temp[t - 12] - 0.05 * anti;
        }
        let max_lag = 24;
        let got = estimate_lag(&demand, &temp, max_lag, LagMode::Lagged).unwrap();
        // Brute-force oracle over the same window.
        let mut best = (0, f64::NEG_INFINITY);
        for tau in 0..=max_lag {
            let corr = pearson(&demand[max_lag..], &temp[max_lag - tau..n - tau]).unwrap();
            if corr > best.1 {
                best = (tau, corr);
            }
        }
        assert_eq!(got, best.0);
        assert_eq!(got, 12);
    }

    #[test]
    fn monotone_transform_of_a_shift_is_still_found() {
        // Roughen the signal so its autocorrelation peaks sharply at zero;
        // the argmax is then exact for any strictly monotone transform.
        let temp: Vec<f64> = smooth_temp(5000)
            .iter()
            .enumerate()
            .map(|(t, v)| v + 2.0 * (((t as f64 * 12.9898).sin() * 43758.5453).fract() - 0.5))
            .collect();
        for tau0 in [0usize, 7, 33] {
            let demand: Vec<f64> = (0..5000)
                .map(|t| {
                    let v = if t >= tau0 { temp[t - tau0] } else { temp[0] };
                    (v - 70.0).powi(3) + 50.0
                })
                .collect();
            let got = estimate_lag(&demand, &temp, 60, LagMode::Lagged).unwrap();
            assert_eq!(got, tau0, "monotone transform at shift {tau0}");
        }
    }

    #[test]
    fn moving_average_window_recovered() {
        let temp = smooth_temp(6000);
        let w0 = 30usize;
        let demand: Vec<f64> = (0..6000)
            .map(|t| {
                if t >= w0 {
                    temp[t - w0..t].iter().sum::<f64>() / w0 as f64
                } else {
                    temp[0]
                }
            })
            .collect();
        let got = estimate_lag(&demand, &temp, 90, LagMode::MovingAvg).unwrap();
        assert_eq!(got, w0);
    }

    #[test]
    fn constant_signal_is_rejected() {
        let temp = smooth_temp(2000);
        let demand = vec![5.0; 2000];
        match estimate_lag(&demand, &temp, 30, LagMode::Lagged) {
            Err(Error::DegenerateModel(_)) => {}
            other => panic!("expected DegenerateModel, got {other:?}"),
        }
    }
}
