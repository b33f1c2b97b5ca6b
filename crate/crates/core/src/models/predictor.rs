//! Runtime-facing model handles and identities.

use nalgebra::{Matrix2, RowVector2, Vector2};

use crate::error::{Error, Result};
use crate::models::context::DayContext;
use crate::models::lti::LtiModel;
use crate::models::ltv::LtvModel;
use crate::models::mlr::MlrModel;
use crate::models::tod::TodModel;
use crate::series::Weekday;

/// Identity of an AC demand model within a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AcId {
    /// Constant-temperature bin model at the given integer bin temperature.
    Lti(i32),
    Mlr,
    Ltv1,
    Ltv2,
}

impl std::fmt::Display for AcId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AcId::Lti(t) => write!(f, "lti{t}"),
            AcId::Mlr => write!(f, "ac_mlr"),
            AcId::Ltv1 => write!(f, "ltv1"),
            AcId::Ltv2 => write!(f, "ltv2"),
        }
    }
}

/// Identity of an OL demand model within a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OlId {
    Tod(Weekday),
    Mlr,
}

impl std::fmt::Display for OlId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OlId::Tod(w) => write!(f, "tod_{w}"),
            OlId::Mlr => write!(f, "ol_mlr"),
        }
    }
}

/// One expert = one (AC model, OL model) combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairId {
    pub ac: AcId,
    pub ol: OlId,
}

impl std::fmt::Display for PairId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+{}", self.ac, self.ol)
    }
}

/// An AC demand model ready for runtime evaluation.
#[derive(Debug, Clone)]
pub enum AcModel {
    Mlr(MlrModel),
    Lti(LtiModel),
    Ltv(LtvModel),
}

impl AcModel {
    /// Dynamic models carry a population state; the regression does not.
    pub fn is_dynamic(&self) -> bool {
        !matches!(self, AcModel::Mlr(_))
    }

    /// `(A_t, C_t)` of a dynamic model at step `t`.
    pub fn matrices_at(&self, t: usize, ctx: &DayContext) -> Result<(Matrix2<f64>, RowVector2<f64>)> {
        match self {
            AcModel::Lti(m) => Ok((m.a, m.c())),
            AcModel::Ltv(m) => m.matrices(t, ctx),
            AcModel::Mlr(_) => Err(Error::Config(
                "the AC regression model has no dynamic state".into(),
            )),
        }
    }

    /// Prediction at step `t`; dynamic models read the supplied state.
    pub fn predict(&self, t: usize, ctx: &DayContext, state: Option<&Vector2<f64>>) -> Result<f64> {
        match self {
            AcModel::Mlr(m) => m.predict(t, ctx),
            _ => {
                let x = state.ok_or_else(|| {
                    Error::Config("dynamic AC model evaluated without a state".into())
                })?;
                let (_, c) = self.matrices_at(t, ctx)?;
                Ok((c * x)[0])
            }
        }
    }

    /// Stationary distribution of the step-0 chain; the standard warm start
    /// for a day run.
    pub fn initial_state(&self, ctx: &DayContext) -> Result<Vector2<f64>> {
        let (a, _) = self.matrices_at(0, ctx)?;
        let to_on = a[(1, 0)];
        let to_off = a[(0, 1)];
        if to_on + to_off <= 0.0 {
            Ok(Vector2::new(0.5, 0.5))
        } else {
            let on = to_on / (to_on + to_off);
            Ok(Vector2::new(1.0 - on, on))
        }
    }
}

/// An OL demand model ready for runtime evaluation. The regression variant
/// sums its residential and commercial components.
#[derive(Debug, Clone)]
pub enum OlPredictor {
    Tod(TodModel),
    Mlr { res: MlrModel, com: MlrModel },
}

impl OlPredictor {
    pub fn predict(&self, t: usize, ctx: &DayContext) -> Result<f64> {
        match self {
            OlPredictor::Tod(m) => Ok(m.predict(ctx.minute(t))),
            OlPredictor::Mlr { res, com } => Ok(res.predict(t, ctx)? + com.predict(t, ctx)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::lti::advance;

    fn ctx<'a>(temps: &'a [f64], measured: &'a [f64]) -> DayContext<'a> {
        DayContext {
            weekday: Weekday::Mon,
            temp_res: temps,
            temp_com: temps,
            temp_res_prev: &[],
            prev_total_last: Some(0.0),
            measured,
        }
    }

    #[test]
    fn identity_dynamics_keep_the_state_and_output_zero() {
        let model = AcModel::Lti(LtiModel {
            a: Matrix2::identity(),
            bin_temp: 80.0,
            p_bar: 4.0,
            n_ac: 100,
        });
        let temps = vec![80.0; 10];
        let meas = vec![0.0; 10];
        let c = ctx(&temps, &meas);
        let mut x = Vector2::new(1.0, 0.0);
        for t in 0..10 {
            assert_eq!(model.predict(t, &c, Some(&x)).unwrap(), 0.0);
            let (a, _) = model.matrices_at(t, &c).unwrap();
            advance(&mut x, &a);
            assert_eq!(x, Vector2::new(1.0, 0.0));
        }
    }

    #[test]
    fn chain_converges_to_the_dominant_eigenvector() {
        // A = [[0.9, 0.2], [0.1, 0.8]] with n_ac * p_bar = 500 kW: the
        // stationary state is [2/3, 1/3] and the output 500/3 kW.
        let model = AcModel::Lti(LtiModel {
            a: Matrix2::new(0.9, 0.2, 0.1, 0.8),
            bin_temp: 80.0,
            p_bar: 5.0,
            n_ac: 100,
        });
        let temps = vec![80.0; 1];
        let meas = vec![0.0; 1];
        let c = ctx(&temps, &meas);
        for start in [
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(0.4, 0.6),
        ] {
            let mut x = start;
            let (a, _) = model.matrices_at(0, &c).unwrap();
            for _ in 0..200 {
                advance(&mut x, &a);
            }
            let y = model.predict(0, &c, Some(&x)).unwrap();
            assert!((y - 500.0 / 3.0).abs() < 0.01, "steady output {y}");
        }
        let x0 = model.initial_state(&c).unwrap();
        assert!((x0[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn regression_model_rejects_matrix_queries() {
        use crate::models::features::{FeatureKind, FeatureSpec};
        let spec = FeatureSpec::new(FeatureKind::Ac, 1440, 0).unwrap();
        let model = AcModel::Mlr(MlrModel {
            coefficients: vec![0.0; spec.dim()],
            spec,
            ridge_weight: 0.0,
        });
        let temps = vec![80.0; 3];
        let meas = vec![0.0; 3];
        assert!(model.matrices_at(0, &ctx(&temps, &meas)).is_err());
        assert!(!model.is_dynamic());
    }

    #[test]
    fn tod_prediction_is_a_minute_lookup() {
        let alpha: Vec<f64> = (0..crate::series::STEPS_PER_DAY).map(|k| k as f64).collect();
        let ol = OlPredictor::Tod(TodModel {
            alpha: alpha.clone(),
            label: Weekday::Tue,
        });
        let temps = vec![80.0; crate::series::STEPS_PER_DAY];
        let meas = vec![0.0; crate::series::STEPS_PER_DAY];
        let c = ctx(&temps, &meas);
        for t in [0, 59, 1439] {
            assert_eq!(ol.predict(t, &c).unwrap(), alpha[t]);
        }
    }
}
