//! Kalman-filter benchmark over the temperature-tracking AC models.
//!
//! Each filter estimates the population state of one dynamic AC model from
//! pseudo-measurements `y~_ac = y - y^_ol`, where the OL prediction comes
//! from one OL model; the bank runs one filter per (AC, OL) pair. Process
//! and measurement noise are estimated from a week of history: the state is
//! reconstructed from the true AC demand by inverting the output map, and
//! the measurement variance is the variance of the OL model's errors.

use nalgebra::{Matrix2, RowVector2, Vector2};

use crate::error::{Error, Result};
use crate::models::{AcModel, DayContext, OlId, OlPredictor, PairId};

/// Noise covariances for one (AC model, OL model) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimates {
    /// Process-noise covariance of the state recurrence.
    pub q: Matrix2<f64>,
    /// Measurement-noise variance of the pseudo-measurement.
    pub r: f64,
    pub source_pair: PairId,
}

impl NoiseEstimates {
    pub fn validate(&self) -> Result<()> {
        if self.r < 0.0 {
            return Err(Error::InvalidInput(format!("R = {} negative", self.r)));
        }
        check_symmetric_psd(&self.q, 1e-9, "Q")
    }
}

/// Filter state: estimate and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct KfState {
    pub x_hat: Vector2<f64>,
    pub p: Matrix2<f64>,
}

impl KfState {
    /// Standard warm start: the model's stationary state with a covariance
    /// matching the worst variance of a fraction in [0, 1].
    pub fn new(x0: Vector2<f64>) -> Self {
        Self {
            x_hat: x0,
            p: Matrix2::identity() * 0.25,
        }
    }
}

pub fn check_symmetric_psd(m: &Matrix2<f64>, tol: f64, what: &str) -> Result<()> {
    if (m[(0, 1)] - m[(1, 0)]).abs() > tol {
        return Err(Error::InvalidInput(format!("{what} not symmetric: {m}")));
    }
    // Eigenvalues of a symmetric 2x2.
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let lambda_min = tr / 2.0 - disc;
    if lambda_min < -tol {
        return Err(Error::InvalidInput(format!(
            "{what} not positive semidefinite (min eigenvalue {lambda_min})"
        )));
    }
    Ok(())
}

/// One day of history for noise estimation.
pub struct NoiseDay<'a> {
    pub ctx: DayContext<'a>,
    /// True AC demand, kW.
    pub y_ac: &'a [f64],
    /// True OL demand, kW.
    pub y_ol: &'a [f64],
}

/// Reconstructs the state trajectory implied by the true AC demand:
/// `x_t = [1 - f_t, f_t]` with on-fraction `f_t = y_ac / (n_ac p_bar(T_t))`
/// clamped to [0, 1].
fn reconstruct_states(model: &AcModel, day: &NoiseDay<'_>) -> Result<Vec<Vector2<f64>>> {
    let n = day.y_ac.len();
    let mut states = Vec::with_capacity(n);
    for t in 0..n {
        let (_, c) = model.matrices_at(t, &day.ctx)?;
        let denom = c[1];
        if denom <= 0.0 {
            return Err(Error::DegenerateModel(format!(
                "output row has zero on-state gain at step {t}"
            )));
        }
        let f = (day.y_ac[t] / denom).clamp(0.0, 1.0);
        states.push(Vector2::new(1.0 - f, f));
    }
    Ok(states)
}

/// Process-noise covariance of a dynamic AC model over historical days.
///
/// Residuals `w_t = x_{t+1} - A_t x_t` are collected within each day and the
/// population covariance of the residual set is returned, symmetrized.
pub fn estimate_q(model: &AcModel, days: &[NoiseDay<'_>]) -> Result<Matrix2<f64>> {
    if days.is_empty() {
        return Err(Error::InvalidInput("Q estimation needs at least one day".into()));
    }
    let mut residuals: Vec<Vector2<f64>> = Vec::new();
    for day in days {
        let states = reconstruct_states(model, day)?;
        for t in 0..states.len().saturating_sub(1) {
            let (a, _) = model.matrices_at(t, &day.ctx)?;
            residuals.push(states[t + 1] - a * states[t]);
        }
    }
    if residuals.is_empty() {
        return Err(Error::InvalidInput("no residuals for Q estimation".into()));
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<Vector2<f64>>() / n;
    let mut q = Matrix2::zeros();
    for w in &residuals {
        let d = w - mean;
        q += d * d.transpose();
    }
    q /= n;
    Ok((q + q.transpose()) * 0.5)
}

/// Measurement-noise variance of one OL model: the population variance of
/// its prediction errors over the history.
pub fn estimate_r(model: &OlPredictor, days: &[NoiseDay<'_>]) -> Result<f64> {
    if days.is_empty() {
        return Err(Error::InvalidInput("R estimation needs at least one day".into()));
    }
    let mut errors = Vec::new();
    for day in days {
        for t in 0..day.y_ol.len() {
            errors.push(day.y_ol[t] - model.predict(t, &day.ctx)?);
        }
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    Ok(errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n)
}

/// One predict-update cycle against a pseudo-measurement.
///
/// Predict: `x- = A x`, `P- = A P A' + Q`; update with gain
/// `K = P- H' / (H P- H' + R)` and the Joseph-form covariance
/// `P = (I - K H) P- (I - K H)' + K R K'`, which keeps `P` symmetric.
pub fn kf_step(
    state: &KfState,
    a: &Matrix2<f64>,
    h: &RowVector2<f64>,
    q: &Matrix2<f64>,
    r: f64,
    pseudo_measurement: f64,
) -> Result<KfState> {
    let x_pred = a * state.x_hat;
    let p_pred = a * state.p * a.transpose() + q;

    let s = (h * p_pred * h.transpose())[0] + r;
    if s <= 0.0 {
        return Err(Error::FilterFailure(format!(
            "innovation variance {s} not positive"
        )));
    }
    let k = p_pred * h.transpose() / s;
    let innovation = pseudo_measurement - (h * x_pred)[0];
    let x_hat = x_pred + k * innovation;
    let i_kh = Matrix2::identity() - k * h;
    let p = i_kh * p_pred * i_kh.transpose() + k * r * k.transpose();
    Ok(KfState {
        x_hat,
        p: (p + p.transpose()) * 0.5,
    })
}

/// Per-day output of one filter.
#[derive(Debug, Clone)]
pub struct KfDayRun {
    pub pair: PairId,
    /// Filtered AC estimate per step, clamped at zero.
    pub y_ac_hat: Vec<f64>,
    pub rmse_kw: f64,
}

/// Bank results for one day.
#[derive(Debug, Clone)]
pub struct KfBankDay {
    pub runs: Vec<KfDayRun>,
    /// Lowest ex-post RMSE across the bank.
    pub bkf_rmse_kw: f64,
    /// Mean RMSE across the bank.
    pub akf_rmse_kw: f64,
}

/// Runs one filter causally over a day and scores it against the truth.
pub fn run_kf_day(
    pair: PairId,
    ac: &AcModel,
    ol: &OlPredictor,
    noise: &NoiseEstimates,
    ctx: &DayContext,
    y_ac_true: &[f64],
) -> Result<KfDayRun> {
    noise.validate()?;
    let n = ctx.measured.len();
    if y_ac_true.len() != n {
        return Err(Error::InvalidInput("truth length mismatch".into()));
    }
    let mut state = KfState::new(ac.initial_state(ctx)?);
    let mut estimates = Vec::with_capacity(n);
    let mut sq_sum = 0.0;
    for t in 0..n {
        let (a, c) = ac.matrices_at(t, ctx)?;
        let pseudo = ctx.measured[t] - ol.predict(t, ctx)?;
        state = kf_step(&state, &a, &c, &noise.q, noise.r, pseudo)?;
        check_symmetric_psd(&state.p, 1e-10, "P")?;
        let est = (c * state.x_hat)[0].max(0.0);
        estimates.push(est);
        let e = est - y_ac_true[t];
        sq_sum += e * e;
    }
    Ok(KfDayRun {
        pair,
        y_ac_hat: estimates,
        rmse_kw: (sq_sum / n as f64).sqrt(),
    })
}

/// Runs every (AC, OL) pair of the bank over one day and summarizes the
/// best and average filters.
pub fn run_kf_bank(
    pairs: &[(PairId, AcModel, OlPredictor)],
    noise: &[NoiseEstimates],
    ctx: &DayContext,
    y_ac_true: &[f64],
) -> Result<KfBankDay> {
    if pairs.is_empty() || pairs.len() != noise.len() {
        return Err(Error::InvalidInput(
            "bank needs one noise estimate per model pair".into(),
        ));
    }
    let mut runs = Vec::with_capacity(pairs.len());
    for ((pair, ac, ol), nz) in pairs.iter().zip(noise) {
        runs.push(run_kf_day(*pair, ac, ol, nz, ctx, y_ac_true)?);
    }
    let bkf = runs.iter().map(|r| r.rmse_kw).fold(f64::INFINITY, f64::min);
    let akf = runs.iter().map(|r| r.rmse_kw).sum::<f64>() / runs.len() as f64;
    Ok(KfBankDay {
        runs,
        bkf_rmse_kw: bkf,
        akf_rmse_kw: akf,
    })
}
