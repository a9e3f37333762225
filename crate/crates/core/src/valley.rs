//! The angular profile ψ of the valley density `ρ(r, θ) = C r ψ(θ)` on the unit disk.
//!
//! ψ is even, 2π-periodic and piecewise linear. On `[0, π]`:
//!
//! * plateau of height 1 on `[0, π/4]`,
//! * linear ramp down to the valley floor ε on `[π/4, 9π/32]`,
//! * floor ε on `[9π/32, 23π/32]` (so ψ(±π/2) = ε),
//! * a slow ramp on `[23π/32, 47π/64]` reaching `ε + (1 - ε)/4`,
//! * a steeper ramp through height 1 at `3π/4` continuing up to 5/4,
//! * plateau 5/4 up to π.
//!
//! The asymmetry of the two ramps around the valley makes `φ ↦ Z(0, φ)` have
//! local minima at φ = ±π/4 (global) and a shallow basin around φ = π, with
//! the line through the origin normal to e₁ crossing only the valley floor.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{DepthError, Result};

/// Largest admissible valley floor.
pub const EPSILON_MAX: f64 = 0.5;

const VALLEY_HALF_WIDTH: f64 = 7.0 * PI / 32.0;
const TOP_HEIGHT: f64 = 1.25;

#[derive(Debug, Clone, PartialEq)]
pub struct ValleyPsi {
    epsilon: f64,
    /// Knots `(θ, ψ)` on `[0, π]`, increasing in θ.
    knots: Vec<(f64, f64)>,
    integral: f64,
}

impl ValleyPsi {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < EPSILON_MAX) {
            return Err(DepthError::Domain(format!(
                "valley floor must lie in (0, {EPSILON_MAX}), got {epsilon}"
            )));
        }
        let ramp = FRAC_PI_4 - VALLEY_HALF_WIDTH;
        let lo = 1.0 - epsilon;
        let steep = 1.5 * lo / ramp;
        let outer = FRAC_PI_2 + VALLEY_HALF_WIDTH;
        let knots = vec![
            (0.0, 1.0),
            (FRAC_PI_4, 1.0),
            (FRAC_PI_2 - VALLEY_HALF_WIDTH, epsilon),
            (outer, epsilon),
            (outer + 0.5 * ramp, epsilon + 0.25 * lo),
            (3.0 * FRAC_PI_4, 1.0),
            (3.0 * FRAC_PI_4 + (TOP_HEIGHT - 1.0) / steep, TOP_HEIGHT),
            (PI, TOP_HEIGHT),
        ];
        let half: f64 = knots
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        Ok(ValleyPsi { epsilon, knots, integral: 2.0 * half })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `∫_0^{2π} ψ(θ) dθ`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn max_value(&self) -> f64 {
        TOP_HEIGHT
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(2.0 * PI);
        let t = if t > PI { 2.0 * PI - t } else { t };
        let k = &self.knots;
        let idx = k.partition_point(|&(th, _)| th <= t).clamp(1, k.len() - 1);
        let (t0, v0) = k[idx - 1];
        let (t1, v1) = k[idx];
        if t1 == t0 {
            return v1;
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// All kink angles in `(-π, π]`.
    pub fn kink_angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().flat_map(|&(t, _)| [t, -t])
    }
}

/// `ψ(θ)` for the default valley profile; errors if `ε` is outside `(0, ε_max)`.
pub fn valley_psi(theta: f64, epsilon: f64) -> Result<f64> {
    Ok(ValleyPsi::new(epsilon)?.eval(theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valley_floor_at_vertical() {
        for eps in [0.01, 0.1, 0.3] {
            assert_eq!(valley_psi(FRAC_PI_2, eps).unwrap(), eps);
            assert_eq!(valley_psi(-FRAC_PI_2, eps).unwrap(), eps);
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(valley_psi(0.0, 0.0).is_err());
        assert!(valley_psi(0.0, -1.0).is_err());
        assert!(valley_psi(0.0, EPSILON_MAX).is_err());
    }

    #[test]
    fn periodic_and_even() {
        let psi = ValleyPsi::new(0.05).unwrap();
        for k in 0..720 {
            let th = -PI + k as f64 * (2.0 * PI / 720.0) + 0.001;
            let a = psi.eval(th);
            assert!((a - psi.eval(th + 2.0 * PI)).abs() < 1e-12);
            assert!((a - psi.eval(-th)).abs() < 1e-12);
            assert!(a >= 0.05 - 1e-15 && a <= psi.max_value() + 1e-15);
        }
    }

    #[test]
    fn integral_matches_fine_riemann_sum() {
        let psi = ValleyPsi::new(0.01).unwrap();
        let n = 200_000;
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n).map(|k| psi.eval((k as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((s - psi.integral()).abs() < 1e-8, "{s} vs {}", psi.integral());
    }
}
