use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};

/// A unit vector on the sphere S^{n-1}, n in {1, 2}.
///
/// In one dimension the only directions are +1 and -1. In two dimensions the
/// direction is stored both as components and as the angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    comps: [f64; 2],
    dim: usize,
}

impl Direction {
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Direction { comps: [c, s], dim: 2 }
    }

    /// `+1` for a non-negative sign, `-1` otherwise.
    pub fn along_1d(sign: f64) -> Self {
        let v = if sign >= 0.0 { 1.0 } else { -1.0 };
        Direction { comps: [v, 0.0], dim: 1 }
    }

    /// Normalizes an arbitrary non-zero vector of length 1 or 2.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        match v.len() {
            1 if v[0] != 0.0 && v[0].is_finite() => Ok(Self::along_1d(v[0])),
            2 => {
                let n = v[0].hypot(v[1]);
                if n == 0.0 || !n.is_finite() {
                    return Err(DepthError::Domain("zero or non-finite direction".into()));
                }
                Ok(Direction { comps: [v[0] / n, v[1] / n], dim: 2 })
            }
            1 => Err(DepthError::Domain("zero or non-finite direction".into())),
            n => Err(DepthError::DimensionMismatch { expected: 2, got: n }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.comps[..self.dim]
    }

    pub fn x(&self) -> f64 {
        self.comps[0]
    }

    pub fn y(&self) -> f64 {
        self.comps[1]
    }

    pub fn as_array(&self) -> [f64; 2] {
        self.comps
    }

    /// Angle in `[0, 2π)`. In 1D, 0 for +1 and π for -1.
    pub fn angle(&self) -> f64 {
        let a = self.comps[1].atan2(self.comps[0]);
        if a < 0.0 {
            (a + TAU) % TAU
        } else {
            a
        }
    }

    /// Counter-clockwise rotation by π/2 (2D only; in 1D returns self).
    pub fn perp(&self) -> Direction {
        if self.dim == 1 {
            return *self;
        }
        Direction { comps: [-self.comps[1], self.comps[0]], dim: 2 }
    }

    pub fn neg(&self) -> Direction {
        Direction { comps: [-self.comps[0], -self.comps[1]], dim: self.dim }
    }

    pub fn dot(&self, p: &[f64]) -> f64 {
        self.components().iter().zip(p).map(|(a, b)| a * b).sum()
    }
}

/// `count` angles spaced uniformly on `[0, 2π)`, starting at 0.
pub fn angle_grid(count: usize) -> impl Iterator<Item = f64> + Clone {
    let step = TAU / count as f64;
    (0..count).map(move |k| k as f64 * step)
}

/// Signed angular difference `a - b` wrapped to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}
