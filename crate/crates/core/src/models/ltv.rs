//! Time-varying AC models built on an LTI bank.
//!
//! At each step an effective temperature (lagged sample or trailing moving
//! average) selects matrices by linearly interpolating the bank's entries;
//! beyond the grid the two nearest models are extrapolated linearly, with
//! entries clamped to [0, 1] and columns re-normalized.

use nalgebra::{Matrix2, RowVector2, Vector2};

use crate::error::Result;
use crate::models::context::DayContext;
use crate::models::lti::LtiBank;

/// Effective-temperature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtvMode {
    /// Use the residential temperature from `tau` steps ago.
    Lagged(usize),
    /// Use the trailing mean of the last `tau` steps.
    MovingAvg(usize),
}

impl LtvMode {
    pub fn tau(&self) -> usize {
        match *self {
            LtvMode::Lagged(t) | LtvMode::MovingAvg(t) => t,
        }
    }
}

/// An LTI bank plus the effective-temperature rule and a runtime state.
#[derive(Debug, Clone, PartialEq)]
pub struct LtvModel {
    pub bank: LtiBank,
    pub mode: LtvMode,
    /// Runtime state `[fraction off, fraction on]` for standalone use; the
    /// online-learning engine owns per-expert copies of this state instead.
    pub state: Vector2<f64>,
}

impl LtvModel {
    pub fn new(bank: LtiBank, mode: LtvMode) -> Self {
        Self {
            bank,
            mode,
            state: Vector2::new(0.5, 0.5),
        }
    }

    /// Effective temperature driving the matrices at step `t`.
    pub fn effective_temp(&self, t: usize, ctx: &DayContext) -> Result<f64> {
        match self.mode {
            LtvMode::Lagged(tau) => ctx.lagged_temp_res(t, tau),
            LtvMode::MovingAvg(tau) => Ok(ctx.moving_avg_temp_res(t, tau)),
        }
    }

    /// `(A_t, C_t)` at step `t`.
    pub fn matrices(&self, t: usize, ctx: &DayContext) -> Result<(Matrix2<f64>, RowVector2<f64>)> {
        Ok(ltv_matrices(&self.bank, self.effective_temp(t, ctx)?))
    }

    /// Current output `C_t x`, then `x <- A_t x`.
    pub fn output_and_advance(&mut self, t: usize, ctx: &DayContext) -> Result<f64> {
        let (a, c) = self.matrices(t, ctx)?;
        let y = (c * self.state)[0];
        self.state = a * self.state;
        Ok(y)
    }
}

fn clamp_and_normalize(mut a: Matrix2<f64>, fallback: &Matrix2<f64>) -> Matrix2<f64> {
    for col in 0..2 {
        let mut sum = 0.0;
        for row in 0..2 {
            a[(row, col)] = a[(row, col)].clamp(0.0, 1.0);
            sum += a[(row, col)];
        }
        if sum > 0.0 {
            for row in 0..2 {
                a[(row, col)] /= sum;
            }
        } else {
            for row in 0..2 {
                a[(row, col)] = fallback[(row, col)];
            }
        }
    }
    a
}

/// Matrices for an arbitrary effective temperature.
///
/// Inside the grid, `A` entries and `p_bar` are interpolated elementwise
/// between the bracketing bins (affine mixing keeps columns stochastic).
/// Beyond either end, the two nearest models are extrapolated with
/// `M(T) = M(end) + (T - end)/dT * (M(end) - M(end - dT))`, after which
/// entries are clamped to [0, 1] and columns re-normalized. A single-model
/// bank is returned as-is.
pub fn ltv_matrices(bank: &LtiBank, effective_temp: f64) -> (Matrix2<f64>, RowVector2<f64>) {
    let n = bank.models.len();
    let n_ac = bank.models[0].n_ac as f64;
    let output = |p_bar: f64| RowVector2::new(0.0, n_ac * p_bar.max(0.0));

    if n == 1 {
        let m = &bank.models[0];
        return (m.a, m.c());
    }

    let pos = (effective_temp - bank.t_min) / bank.delta_t;
    let (lo, hi, u) = if pos <= 0.0 {
        (0, 1, pos) // u <= 0: extrapolate below using the two lowest models
    } else if pos >= (n - 1) as f64 {
        (n - 2, n - 1, pos - (n - 2) as f64) // u >= 1: extrapolate above
    } else {
        let lo = pos.floor() as usize;
        (lo, lo + 1, pos - lo as f64)
    };
    let ma = &bank.models[lo];
    let mb = &bank.models[hi];
    let a = ma.a * (1.0 - u) + mb.a * u;
    let p_bar = ma.p_bar * (1.0 - u) + mb.p_bar * u;
    let fallback = if u > 0.5 { &mb.a } else { &ma.a };
    (clamp_and_normalize(a, fallback), output(p_bar))
}
