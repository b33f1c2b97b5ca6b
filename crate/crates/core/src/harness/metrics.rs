//! Error metrics and their aggregation across days.

use crate::error::{Error, Result};

/// Root mean squared error between an estimate and the truth.
pub fn rmse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() || estimate.is_empty() {
        return Err(Error::InvalidInput(format!(
            "rmse needs equal nonempty lengths, got {} and {}",
            estimate.len(),
            truth.len()
        )));
    }
    let sq: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sq / estimate.len() as f64).sqrt())
}

/// Per-day errors of one scenario run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayMetrics {
    pub day: usize,
    pub rmse_total_kw: f64,
    pub rmse_ac_kw: f64,
    pub rmse_ol_kw: f64,
}

/// Minimum / mean / maximum of one metric across days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRange {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl MetricRange {
    pub fn over<I: IntoIterator<Item = f64>>(values: I) -> Option<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut n = 0usize;
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        Some(Self {
            min,
            mean: sum / n as f64,
            max,
        })
    }
}

/// Aggregated scenario metrics.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub per_day: Vec<DayMetrics>,
    pub total: MetricRange,
    pub ac: MetricRange,
    pub ol: MetricRange,
}

impl Metrics {
    pub fn from_days(per_day: Vec<DayMetrics>) -> Result<Self> {
        let total = MetricRange::over(per_day.iter().map(|d| d.rmse_total_kw));
        let ac = MetricRange::over(per_day.iter().map(|d| d.rmse_ac_kw));
        let ol = MetricRange::over(per_day.iter().map(|d| d.rmse_ol_kw));
        match (total, ac, ol) {
            (Some(total), Some(ac), Some(ol)) => Ok(Self {
                per_day,
                total,
                ac,
                ol,
            }),
            _ => Err(Error::InvalidInput("no days to aggregate".into())),
        }
    }
}
