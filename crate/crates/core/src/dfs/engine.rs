//! The online estimation engine.
//!
//! Each expert is one (AC model, OL model) pair carried through the day by a
//! two-step update: a measurement-based correction against the arriving
//! total-demand sample, and a model-based advancement to the next step. Two
//! update methods are supported:
//!
//! - **Method 1** treats every model as a black box and accumulates an
//!   output-space correction `kappa` that is added to the open-loop
//!   predictions.
//! - **Method 2** (dynamic AC models only) instead adjusts the population
//!   state itself: the state advances from the measurement-adjusted
//!   parameter, while the OL entry keeps the Method 1 treatment.
//!
//! A Fixed Share step reweights the experts from their losses, and the
//! emitted estimate is the weighted combination of the expert outputs.
//! Everything is causal: the estimate for step `t` is formed before `y_t`
//! arrives.

use nalgebra::{Matrix2, RowVector2, Vector2};

use crate::dfs::fixed_share::fixed_share;
use crate::dfs::theta::{
    kappa_update, loss, theta_tilde, OutputMap, Theta, ThetaLayout,
};
use crate::error::{Error, Result};
use crate::models::{AcModel, DayContext, OlPredictor, PairId};

/// Which expert update runs each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMethod {
    M1,
    M2,
}

impl UpdateMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "1" | "m1" => Some(UpdateMethod::M1),
            "2" | "m2" => Some(UpdateMethod::M2),
            _ => None,
        }
    }
}

impl std::fmt::Display for UpdateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpdateMethod::M1 => write!(f, "1"),
            UpdateMethod::M2 => write!(f, "2"),
        }
    }
}

/// Which model pairs participate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSet {
    /// Every AC model (all bin models, the regression and both
    /// temperature-tracking chains) crossed with every OL model.
    Full,
    /// Excludes the constant-temperature bin models.
    Red,
    /// Additionally excludes the AC regression; usable in a Kalman filter.
    Kf,
}

impl ModelSet {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(ModelSet::Full),
            "red" => Some(ModelSet::Red),
            "kf" => Some(ModelSet::Kf),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModelSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSet::Full => write!(f, "full"),
            ModelSet::Red => write!(f, "red"),
            ModelSet::Kf => write!(f, "kf"),
        }
    }
}

/// Engine parameters for one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct DfsConfig {
    /// Measurement-update step size (zero disables the feedback entirely).
    pub eta_s: f64,
    /// Weighting learning rate.
    pub eta_r: f64,
    /// Fixed Share mixing mass.
    pub lambda: f64,
    pub update_method: UpdateMethod,
    pub model_set: ModelSet,
    /// Clamp emitted demand estimates at zero.
    pub clamp_nonneg: bool,
    /// Project adjusted state blocks onto the simplex (Method 2 only).
    pub project_simplex: bool,
}

impl DfsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_s.is_finite() && self.eta_s >= 0.0) {
            return Err(Error::InvalidInput(format!("eta_s must be >= 0, got {}", self.eta_s)));
        }
        if !(self.eta_r.is_finite() && self.eta_r > 0.0) {
            return Err(Error::InvalidInput(format!("eta_r must be > 0, got {}", self.eta_r)));
        }
        if !(self.lambda.is_finite() && (0.0..=1.0).contains(&self.lambda)) {
            return Err(Error::InvalidInput(format!(
                "lambda must be in [0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// One expert's full runtime state.
#[derive(Debug, Clone)]
pub struct ExpertState {
    pub pair: PairId,
    /// Resolved method for this pair (Method 2 falls back to Method 1 for
    /// AC models without a dynamic state).
    pub method: UpdateMethod,
    pub theta_hat: Theta,
    pub theta_check: Theta,
    pub kappa_hat: Theta,
    /// Dynamic AC population state where applicable: the open-loop state
    /// under Method 1, the measurement-adjusted state under Method 2.
    pub model_state: Option<Vector2<f64>>,
    pub weight: f64,
    ac: AcModel,
    ol: OlPredictor,
    /// `(A_t, C_t)` of the dynamic AC model at the current step.
    mats: Option<(Matrix2<f64>, RowVector2<f64>)>,
    /// `(y_ac, y_ol)` predictions for the current step.
    out_pair: (f64, f64),
}

impl ExpertState {
    /// Builds an expert positioned at step 0.
    ///
    /// `method` is taken literally: requesting Method 2 for an AC model
    /// without a dynamic state is a configuration error (the caller decides
    /// the fallback policy).
    pub fn new(
        pair: PairId,
        ac: AcModel,
        ol: OlPredictor,
        method: UpdateMethod,
        ctx: &DayContext,
    ) -> Result<Self> {
        if method == UpdateMethod::M2 && !ac.is_dynamic() {
            return Err(Error::Config(format!(
                "update method 2 requires a dynamic AC model, but pair {pair} has a static one"
            )));
        }
        let ol0 = ol.predict(0, ctx)?;
        let (model_state, mats) = if ac.is_dynamic() {
            let x0 = ac.initial_state(ctx)?;
            let m = ac.matrices_at(0, ctx)?;
            (Some(x0), Some(m))
        } else {
            (None, None)
        };
        let ac0 = match (&model_state, &mats) {
            (Some(x), Some((_, c))) => (c * x)[0],
            _ => ac.predict(0, ctx, None)?,
        };
        let (theta_hat, kappa_hat) = match method {
            UpdateMethod::M1 => (
                Theta::outputs(ac0, ol0),
                Theta::zero(ThetaLayout::Outputs),
            ),
            UpdateMethod::M2 => (
                Theta::state_plus_ol(model_state.expect("dynamic state"), ol0),
                Theta::zero(ThetaLayout::StatePlusOl),
            ),
        };
        Ok(Self {
            pair,
            method,
            theta_hat,
            theta_check: theta_hat,
            kappa_hat,
            model_state,
            weight: 0.0,
            ac,
            ol,
            mats,
            out_pair: (ac0, ol0),
        })
    }

    /// The measurement map for the current step.
    pub fn output_map(&self) -> OutputMap {
        match self.method {
            UpdateMethod::M1 => OutputMap::outputs(),
            UpdateMethod::M2 => {
                let (_, c) = self.mats.expect("method 2 expert has matrices");
                OutputMap::state_plus_ol(c)
            }
        }
    }

    /// `(y_ac, y_ol)` predictions for the current step.
    pub fn output_pair(&self) -> (f64, f64) {
        self.out_pair
    }

    /// Incorporates `y_t` and advances the expert to step `t + 1`.
    ///
    /// Under Method 2 the state-block step size is normalized by the squared
    /// norm of the AC output row, so the induced output-space correction has
    /// the same magnitude `eta_s * residual` as under Method 1; without this
    /// the state update would scale with the population size and diverge for
    /// any practical step size.
    pub fn observe_and_advance(
        &mut self,
        t: usize,
        y_t: f64,
        ctx: &DayContext,
        cfg: &DfsConfig,
    ) -> Result<()> {
        let c_now = self.output_map();
        self.kappa_hat = kappa_update(&self.kappa_hat, &self.theta_hat, &c_now, y_t, cfg.eta_s)?;

        let t_next = t + 1;
        let ol_open = self.ol.predict(t_next, ctx)?;
        match self.method {
            UpdateMethod::M1 => {
                let ac_open = if let Some(x) = self.model_state.as_mut() {
                    let (a_now, _) = self.mats.expect("dynamic expert has matrices");
                    *x = a_now * *x;
                    let m_next = self.ac.matrices_at(t_next, ctx)?;
                    let y = (m_next.1 * *x)[0];
                    self.mats = Some(m_next);
                    y
                } else {
                    self.ac.predict(t_next, ctx, None)?
                };
                self.theta_check = Theta::outputs(ac_open, ol_open);
                self.theta_hat = Theta::outputs(
                    ac_open + self.kappa_hat.get(0),
                    ol_open + self.kappa_hat.get(1),
                );
                self.out_pair = (self.theta_hat.get(0), self.theta_hat.get(1));
            }
            UpdateMethod::M2 => {
                let eta_state = {
                    let norm_sq = c_now.ac_norm_sq();
                    if norm_sq > 0.0 {
                        cfg.eta_s / norm_sq
                    } else {
                        0.0
                    }
                };
                let adjusted =
                    theta_tilde(&self.theta_hat, &c_now, y_t, eta_state, cfg.project_simplex)?;
                let (a_now, _) = self.mats.expect("method 2 expert has matrices");
                let x_next = a_now * adjusted.state_block();
                let m_next = self.ac.matrices_at(t_next, ctx)?;
                self.mats = Some(m_next);
                self.model_state = Some(x_next);
                self.theta_check = Theta::state_plus_ol(x_next, ol_open);
                self.theta_hat =
                    Theta::state_plus_ol(x_next, ol_open + self.kappa_hat.ol_entry());
                self.out_pair = ((m_next.1 * x_next)[0], self.theta_hat.ol_entry());
            }
        }
        if !self.theta_hat.is_finite() || !self.kappa_hat.is_finite() {
            return Err(Error::InvalidInput(format!(
                "expert {} produced a non-finite parameter at step {t}",
                self.pair
            )));
        }
        Ok(())
    }
}

/// Weighted combination of expert `(y_ac, y_ol)` outputs.
pub fn combine(outputs: &[(f64, f64)], weights: &[f64], clamp_nonneg: bool) -> (f64, f64) {
    let mut ac = 0.0;
    let mut ol = 0.0;
    for ((pa, po), w) in outputs.iter().zip(weights) {
        ac += w * pa;
        ol += w * po;
    }
    if clamp_nonneg {
        ac = ac.max(0.0);
        ol = ol.max(0.0);
    }
    (ac, ol)
}

/// Per-step outputs of one day run.
#[derive(Debug, Clone)]
pub struct DayResult {
    pub pair_ids: Vec<PairId>,
    /// Causal estimates: entry `t` was formed before `y_t` arrived.
    pub y_ac_hat: Vec<f64>,
    pub y_ol_hat: Vec<f64>,
    pub y_total_hat: Vec<f64>,
    /// Weights used for the estimate at each step (row `t` emits step `t`).
    pub weights: Vec<Vec<f64>>,
    /// Per-expert losses incurred at each step.
    pub losses: Vec<Vec<f64>>,
}

/// Runs the engine causally over one day of measurements.
///
/// Experts start from their open-loop model predictions with zero
/// accumulated correction and uniform weights. At each step the arriving
/// measurement scores every expert, the weights take a Fixed Share step,
/// each expert incorporates the measurement and advances, and the weighted
/// combination is emitted as the estimate for the next step.
pub fn run_day(
    cfg: &DfsConfig,
    pairs: Vec<(PairId, AcModel, OlPredictor)>,
    ctx: &DayContext,
) -> Result<DayResult> {
    cfg.validate()?;
    let n = ctx.measured.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty measurement stream".into()));
    }
    if ctx.temp_res.len() != n || ctx.temp_com.len() != n {
        return Err(Error::InvalidInput(format!(
            "stream length mismatch: measured {n}, temp_res {}, temp_com {}",
            ctx.temp_res.len(),
            ctx.temp_com.len()
        )));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no model pairs".into()));
    }

    let n_experts = pairs.len();
    let mut experts: Vec<ExpertState> = pairs
        .into_iter()
        .map(|(pair, ac, ol)| {
            let method = if cfg.update_method == UpdateMethod::M2 && ac.is_dynamic() {
                UpdateMethod::M2
            } else {
                UpdateMethod::M1
            };
            ExpertState::new(pair, ac, ol, method, ctx)
        })
        .collect::<Result<_>>()?;
    let mut weights = vec![1.0 / n_experts as f64; n_experts];
    for e in experts.iter_mut() {
        e.weight = weights[0];
    }

    let mut result = DayResult {
        pair_ids: experts.iter().map(|e| e.pair).collect(),
        y_ac_hat: Vec::with_capacity(n),
        y_ol_hat: Vec::with_capacity(n),
        y_total_hat: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        losses: Vec::with_capacity(n),
    };
    let emit = |result: &mut DayResult, experts: &[ExpertState], weights: &[f64]| {
        let outputs: Vec<(f64, f64)> = experts.iter().map(|e| e.output_pair()).collect();
        let (ac, ol) = combine(&outputs, weights, cfg.clamp_nonneg);
        result.y_ac_hat.push(ac);
        result.y_ol_hat.push(ol);
        result.y_total_hat.push(ac + ol);
        result.weights.push(weights.to_vec());
    };
    emit(&mut result, &experts, &weights);

    let mut loss_row = vec![0.0; n_experts];
    for t in 0..n {
        let y_t = ctx.measured[t];
        for (slot, e) in loss_row.iter_mut().zip(&experts) {
            *slot = loss(&e.theta_hat, &e.output_map(), y_t)?;
        }
        result.losses.push(loss_row.clone());
        if t + 1 == n {
            break;
        }
        fixed_share(&mut weights, &loss_row, cfg.eta_r, cfg.lambda)?;
        for (e, w) in experts.iter_mut().zip(&weights) {
            e.observe_and_advance(t, y_t, ctx, cfg)?;
            e.weight = *w;
        }
        emit(&mut result, &experts, &weights);
    }
    Ok(result)
}
