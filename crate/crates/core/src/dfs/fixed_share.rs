//! Fixed Share weighting over the expert bank.

use crate::error::{Error, Result};

/// One Fixed Share step:
///
/// ```text
/// w'_m = lambda / N + (1 - lambda) * w_m exp(-eta_r l_m) / sum_j w_j exp(-eta_r l_j)
/// ```
///
/// The minimum loss is subtracted before exponentiation; the ratio is
/// unchanged and the largest exponent becomes zero, so the update cannot
/// overflow or underflow to an all-zero denominator.
pub fn fixed_share(weights: &mut [f64], losses: &[f64], eta_r: f64, lambda: f64) -> Result<()> {
    let n = weights.len();
    if n == 0 || losses.len() != n {
        return Err(Error::InvalidInput(format!(
            "weights ({n}) and losses ({}) must be equal-length and nonempty",
            losses.len()
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidInput(format!("lambda {lambda} outside [0, 1]")));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("non-finite loss".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }

    let min_loss = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut denom = 0.0;
    for (w, l) in weights.iter_mut().zip(losses) {
        *w *= (-eta_r * (l - min_loss)).exp();
        denom += *w;
    }
    if denom <= 0.0 {
        return Err(Error::InvalidInput("all weights are zero".into()));
    }
    let share = lambda / n as f64;
    for w in weights.iter_mut() {
        *w = share + (1.0 - lambda) * (*w / denom);
    }
    Ok(())
}
