//! Ridge-regularized multiple linear regression, solved by the normal
//! equations.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::context::DayContext;
use crate::models::features::{build_features, FeatureSpec};

/// A fitted linear predictor over one of the [`FeatureSpec`] layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrModel {
    pub coefficients: Vec<f64>,
    pub spec: FeatureSpec,
    pub ridge_weight: f64,
}

impl MlrModel {
    /// Predicted demand at step `t`, computed over the nonzero features only.
    pub fn predict(&self, t: usize, ctx: &DayContext) -> Result<f64> {
        let mut acc = 0.0;
        self.spec
            .for_each_nonzero(t, ctx, |i, v| acc += self.coefficients[i] * v)?;
        Ok(acc)
    }

    /// Dense dot-product evaluation; exists as the slow reference for the
    /// sparse path.
    pub fn predict_dense(&self, t: usize, ctx: &DayContext) -> Result<f64> {
        let fv = build_features(&self.spec, t, ctx)?;
        Ok(fv
            .values
            .iter()
            .zip(&self.coefficients)
            .map(|(x, b)| x * b)
            .sum())
    }
}

/// One training day: the context serving features and the target signal the
/// regression should reproduce.
pub struct TrainingDay<'a> {
    pub ctx: DayContext<'a>,
    pub target: &'a [f64],
}

/// Fits coefficients minimizing `sum (target - features . beta)^2 +
/// ridge * |beta|^2` by solving the regularized normal equations exactly.
///
/// Steps whose features cannot be built (missing lag history at the start of
/// the first training day) are skipped.
pub fn fit_mlr(days: &[TrainingDay<'_>], spec: &FeatureSpec, ridge_weight: f64) -> Result<MlrModel> {
    if days.is_empty() {
        return Err(Error::InvalidInput("MLR training needs at least one day".into()));
    }
    if ridge_weight < 0.0 || !ridge_weight.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ridge weight must be finite and nonnegative, got {ridge_weight}"
        )));
    }
    let dim = spec.dim();
    let mut xtx = DMatrix::<f64>::zeros(dim, dim);
    let mut xty = DVector::<f64>::zeros(dim);
    let mut nnz: Vec<(usize, f64)> = Vec::with_capacity(8);
    let mut n_rows = 0usize;
    for day in days {
        if day.target.len() != day.ctx.n_steps() {
            return Err(Error::InvalidInput(format!(
                "target length {} does not match day length {}",
                day.target.len(),
                day.ctx.n_steps()
            )));
        }
        for t in 0..day.ctx.n_steps() {
            nnz.clear();
            match spec.for_each_nonzero(t, &day.ctx, |i, v| nnz.push((i, v))) {
                Ok(()) => {}
                Err(Error::InsufficientHistory(_)) => continue,
                Err(e) => return Err(e),
            }
            let y = day.target[t];
            for &(i, vi) in &nnz {
                for &(j, vj) in &nnz {
                    xtx[(i, j)] += vi * vj;
                }
                xty[i] += vi * y;
            }
            n_rows += 1;
        }
    }
    if n_rows == 0 {
        return Err(Error::InvalidInput("no usable training rows".into()));
    }
    for i in 0..dim {
        xtx[(i, i)] += ridge_weight;
    }
    let chol = Cholesky::new(xtx).ok_or_else(|| {
        Error::SingularSystem(
            "MLR normal equations not positive definite (degenerate feature column with zero ridge)"
                .into(),
        )
    })?;
    let beta = chol.solve(&xty);
    Ok(MlrModel {
        coefficients: beta.iter().copied().collect(),
        spec: *spec,
        ridge_weight,
    })
}
