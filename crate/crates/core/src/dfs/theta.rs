//! Parameter vectors and their measurement-based updates.
//!
//! An expert's parameter is either the pair of demand outputs
//! `[y_ac, y_ol]` or, for dynamic AC models updated in state space, the
//! state plus the OL output `[x_off, x_on, y_ol]`. The loss against an
//! arriving measurement is `l = 1/2 (C theta - y)^2`, and with the squared
//! Euclidean divergence both measurement-based updates have closed forms:
//!
//! ```text
//! kappa' = kappa + eta_s * C' (y - C theta_hat)
//! theta~ = theta_hat + eta_s * C' (y - C theta_hat)
//! ```

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Coordinate layout of a parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaLayout {
    /// `[y_ac, y_ol]` — demand outputs only.
    Outputs,
    /// `[x_off, x_on, y_ol]` — dynamic AC state plus the OL output.
    StatePlusOl,
}

impl ThetaLayout {
    pub fn dim(self) -> usize {
        match self {
            ThetaLayout::Outputs => 2,
            ThetaLayout::StatePlusOl => 3,
        }
    }
}

/// A parameter vector in one of the two layouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub layout: ThetaLayout,
    vals: [f64; 3],
}

impl Theta {
    pub fn zero(layout: ThetaLayout) -> Self {
        Self { layout, vals: [0.0; 3] }
    }

    pub fn outputs(y_ac: f64, y_ol: f64) -> Self {
        Self {
            layout: ThetaLayout::Outputs,
            vals: [y_ac, y_ol, 0.0],
        }
    }

    pub fn state_plus_ol(x: Vector2<f64>, y_ol: f64) -> Self {
        Self {
            layout: ThetaLayout::StatePlusOl,
            vals: [x[0], x[1], y_ol],
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vals[..self.dim()]
    }

    pub fn get(&self, i: usize) -> f64 {
        debug_assert!(i < self.dim());
        self.vals[i]
    }

    /// State block of a `StatePlusOl` vector.
    pub fn state_block(&self) -> Vector2<f64> {
        debug_assert_eq!(self.layout, ThetaLayout::StatePlusOl);
        Vector2::new(self.vals[0], self.vals[1])
    }

    /// The OL coordinate (last entry in both layouts).
    pub fn ol_entry(&self) -> f64 {
        self.vals[self.dim() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

/// The row mapping a parameter vector to the measured total demand:
/// `[1, 1]` for outputs, `[c_ac_0, c_ac_1, 1]` for state-plus-OL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputMap {
    pub layout: ThetaLayout,
    vals: [f64; 3],
}

impl OutputMap {
    pub fn outputs() -> Self {
        Self {
            layout: ThetaLayout::Outputs,
            vals: [1.0, 1.0, 0.0],
        }
    }

    pub fn state_plus_ol(c_ac: nalgebra::RowVector2<f64>) -> Self {
        Self {
            layout: ThetaLayout::StatePlusOl,
            vals: [c_ac[0], c_ac[1], 1.0],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vals[..self.layout.dim()]
    }

    /// `C theta`.
    pub fn apply(&self, theta: &Theta) -> Result<f64> {
        if theta.layout != self.layout {
            return Err(Error::Config(format!(
                "output map layout {:?} does not match theta layout {:?}",
                self.layout, theta.layout
            )));
        }
        Ok(self
            .as_slice()
            .iter()
            .zip(theta.as_slice())
            .map(|(c, t)| c * t)
            .sum())
    }

    /// Squared norm of the AC block (zero for the outputs layout).
    pub fn ac_norm_sq(&self) -> f64 {
        match self.layout {
            ThetaLayout::Outputs => 0.0,
            ThetaLayout::StatePlusOl => self.vals[0] * self.vals[0] + self.vals[1] * self.vals[1],
        }
    }
}

/// Loss of a prediction against the arriving measurement,
/// `1/2 (C theta - y)^2`.
pub fn loss(theta_hat: &Theta, c: &OutputMap, y: f64) -> Result<f64> {
    let r = c.apply(theta_hat)? - y;
    Ok(0.5 * r * r)
}

/// Closed-form update of the accumulated output correction.
pub fn kappa_update(
    kappa_hat: &Theta,
    theta_hat: &Theta,
    c: &OutputMap,
    y: f64,
    eta_s: f64,
) -> Result<Theta> {
    if kappa_hat.layout != theta_hat.layout {
        return Err(Error::Config("kappa and theta layouts differ".into()));
    }
    let residual = y - c.apply(theta_hat)?;
    let mut out = *kappa_hat;
    for (i, ci) in c.as_slice().iter().enumerate() {
        out.vals[i] += eta_s * ci * residual;
    }
    Ok(out)
}

/// Closed-form measurement-adjusted parameter,
/// `theta~ = theta_hat + eta_s * C' (y - C theta_hat)`, optionally followed
/// by a Euclidean projection of the state block onto the probability simplex.
pub fn theta_tilde(
    theta_hat: &Theta,
    c: &OutputMap,
    y: f64,
    eta_s: f64,
    project_state_simplex: bool,
) -> Result<Theta> {
    let residual = y - c.apply(theta_hat)?;
    let mut out = *theta_hat;
    for (i, ci) in c.as_slice().iter().enumerate() {
        out.vals[i] += eta_s * ci * residual;
    }
    if project_state_simplex && out.layout == ThetaLayout::StatePlusOl {
        let p = project_simplex2(out.state_block());
        out.vals[0] = p[0];
        out.vals[1] = p[1];
    }
    Ok(out)
}

/// Euclidean projection of a 2-vector onto `{x >= 0, x_0 + x_1 = 1}`.
pub fn project_simplex2(v: Vector2<f64>) -> Vector2<f64> {
    // Project onto the hyperplane, then clamp to the segment's endpoints.
    let shift = (v[0] + v[1] - 1.0) / 2.0;
    let a = v[0] - shift;
    if a <= 0.0 {
        Vector2::new(0.0, 1.0)
    } else if a >= 1.0 {
        Vector2::new(1.0, 0.0)
    } else {
        Vector2::new(a, 1.0 - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residual_gives_zero_loss() {
        let theta = Theta::outputs(2.0, 3.0);
        let c = OutputMap::outputs();
        assert_eq!(loss(&theta, &c, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_residual_gives_half() {
        let theta = Theta::outputs(2.0, 3.0);
        let c = OutputMap::outputs();
        assert_eq!(loss(&theta, &c, 6.0).unwrap(), 0.5);
    }

    #[test]
    fn loss_is_quadratic_in_the_residual() {
        let c = OutputMap::outputs();
        let l1 = loss(&Theta::outputs(2.0, 3.0), &c, 6.0).unwrap();
        let l10 = loss(&Theta::outputs(2.0, 3.0), &c, 15.0).unwrap();
        assert!((l10 - 100.0 * l1).abs() < 1e-12);
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let theta = Theta::zero(ThetaLayout::StatePlusOl);
        let c = OutputMap::outputs();
        assert!(loss(&theta, &c, 1.0).is_err());
    }

    #[test]
    fn kappa_hand_example() {
        let kappa = Theta::zero(ThetaLayout::Outputs);
        let theta = Theta::outputs(2.0, 3.0);
        let c = OutputMap::outputs();
        let out = kappa_update(&kappa, &theta, &c, 6.0, 0.1).unwrap();
        assert!((out.get(0) - 0.1).abs() < 1e-15);
        assert!((out.get(1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn kappa_fixed_points() {
        let kappa = Theta::outputs(4.0, -1.0);
        let theta = Theta::outputs(2.0, 3.0);
        let c = OutputMap::outputs();
        // eta_s = 0 leaves kappa unchanged.
        let out = kappa_update(&kappa, &theta, &c, 6.0, 0.0).unwrap();
        assert_eq!(out, kappa);
        // So does a zero residual.
        let out = kappa_update(&kappa, &theta, &c, 5.0, 0.3).unwrap();
        assert_eq!(out, kappa);
    }

    #[test]
    fn theta_tilde_hand_example_state_layout() {
        // theta = [0.5, 0.5, 100], C = [0, 500, 1], y = 400, eta_s = 1e-3:
        // residual 50, tilde = [0.5, 25.5, 100.05].
        let theta = Theta::state_plus_ol(Vector2::new(0.5, 0.5), 100.0);
        let c = OutputMap::state_plus_ol(nalgebra::RowVector2::new(0.0, 500.0));
        let out = theta_tilde(&theta, &c, 400.0, 1e-3, false).unwrap();
        assert!((out.get(0) - 0.5).abs() < 1e-12);
        assert!((out.get(1) - 25.5).abs() < 1e-12);
        assert!((out.get(2) - 100.05).abs() < 1e-12);
    }

    #[test]
    fn eta_zero_is_the_identity() {
        let theta = Theta::outputs(7.0, 9.0);
        let c = OutputMap::outputs();
        let out = theta_tilde(&theta, &c, 100.0, 0.0, false).unwrap();
        assert_eq!(out, theta);
    }

    #[test]
    fn closed_form_matches_a_numerical_minimizer() {
        // The update minimizes g(t) = eta <grad, t> + 1/2 |t - center|^2.
        // Gradient descent from a far-away start converges to the same
        // point without using the closed form.
        let mut seed = 0x12345678u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as f64 / (1u64 << 31) as f64 - 1.0
        };
        for trial in 0..200 {
            let theta = Theta::state_plus_ol(Vector2::new(next(), next()), 100.0 * next());
            let c = OutputMap::state_plus_ol(nalgebra::RowVector2::new(next(), 5.0 + next()));
            let y = 10.0 * next();
            let eta = 0.05 * (next() + 1.5);
            let closed = theta_tilde(&theta, &c, y, eta, false).unwrap();

            let resid = c.apply(&theta).unwrap() - y;
            let grad: Vec<f64> = c.as_slice().iter().map(|ci| ci * resid).collect();
            let mut t = [10.0 * next(), 10.0 * next(), 10.0 * next()];
            for _ in 0..600 {
                for i in 0..3 {
                    let g = eta * grad[i] + (t[i] - theta.get(i));
                    t[i] -= 0.2 * g;
                }
            }
            for i in 0..3 {
                assert!(
                    (t[i] - closed.get(i)).abs() < 1e-6,
                    "trial {trial}, coord {i}: {} vs {}",
                    t[i],
                    closed.get(i)
                );
            }
        }
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex2(Vector2::new(0.3, 0.7)), Vector2::new(0.3, 0.7));
        let p = project_simplex2(Vector2::new(0.9, 0.7));
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
        assert_eq!(project_simplex2(Vector2::new(-5.0, 0.2)), Vector2::new(0.0, 1.0));
        assert_eq!(project_simplex2(Vector2::new(9.0, 0.2)), Vector2::new(1.0, 0.0));
    }
}
