//! Uniformly sampled scalar signals on a one-minute grid.

use crate::error::{Error, Result};

/// Number of one-minute steps in a day.
pub const STEPS_PER_DAY: usize = 1440;

/// Length of a step in hours.
pub const STEP_HOURS: f64 = 1.0 / 60.0;

/// Minutes in a seven-day week (the span of the time-of-week indicator).
pub const WEEK_MINUTES: usize = 10_080;

/// A uniformly sampled scalar signal (kW or °F) with a 60 s step.
///
/// `start_step` anchors the first sample on the global minute grid; sample
/// `values[i]` belongs to step `start_step + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub start_step: usize,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start_step: usize, values: Vec<f64>) -> Self {
        Self { start_step, values }
    }

    /// A day-long series starting at step 0.
    pub fn from_day(values: Vec<f64>) -> Self {
        Self::new(0, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Rejects series that are not exactly one day long.
    pub fn expect_day_length(&self, what: &str) -> Result<()> {
        if self.len() != STEPS_PER_DAY {
            return Err(Error::InvalidInput(format!(
                "{what} must have {STEPS_PER_DAY} samples, got {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// Rejects series containing NaN or infinite samples.
    pub fn expect_finite(&self, what: &str) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{what} has a non-finite sample at index {i}"
            )));
        }
        Ok(())
    }
}

/// Weekday tag for the Mon–Fri synthetic calendar. Day index `d` maps to
/// weekday `d mod 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
}

impl Weekday {
    pub const ALL: [Weekday; 5] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
    ];

    pub fn from_day_index(day: usize) -> Self {
        Self::ALL[day % 5]
    }

    /// Position within the week, Monday = 0.
    pub fn index(self) -> usize {
        match self {
            Weekday::Mon => 0,
            Weekday::Tue => 1,
            Weekday::Wed => 2,
            Weekday::Thu => 3,
            Weekday::Fri => 4,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mon" => Some(Weekday::Mon),
            "tue" => Some(Weekday::Tue),
            "wed" => Some(Weekday::Wed),
            "thu" => Some(Weekday::Thu),
            "fri" => Some(Weekday::Fri),
            _ => None,
        }
    }
}

impl std::fmt::Display for Weekday {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Weekday::Mon => "mon",
            Weekday::Tue => "tue",
            Weekday::Wed => "wed",
            Weekday::Thu => "thu",
            Weekday::Fri => "fri",
        };
        f.write_str(s)
    }
}
