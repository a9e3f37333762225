use std::f64::consts::PI;

use crate::density::Density;
use crate::direction::Direction;
use crate::error::Result;
use crate::slice::SliceEstimator;

use super::SolverConfig;

/// Right-hand side `f(x, ν) = slice(x, ν)` of the depth equation, with the
/// direction-free fallback `min_ν slice(x, ν)` over a fixed direction grid.
#[derive(Debug, Clone)]
pub struct Rhs<'a> {
    est: SliceEstimator<'a>,
    /// Lines through a point are parametrized by normals in `[0, π)`.
    fallback_dirs: Vec<Direction>,
}

impl<'a> Rhs<'a> {
    pub fn new(d: &'a Density, cfg: &SolverConfig) -> Result<Self> {
        Ok(Self::from_estimator(SliceEstimator::new(d, cfg.slice)?, cfg.direction_count))
    }

    pub fn from_estimator(est: SliceEstimator<'a>, direction_count: usize) -> Self {
        let fallback_dirs = if est.density().dim() == 1 {
            vec![Direction::along_1d(1.0)]
        } else {
            let half = (direction_count / 2).max(1);
            (0..half).map(|k| Direction::from_angle(PI * k as f64 / half as f64)).collect()
        };
        Rhs { est, fallback_dirs }
    }

    pub fn estimator(&self) -> &SliceEstimator<'a> {
        &self.est
    }

    pub fn eval(&self, x: &[f64], dir: Option<&Direction>) -> Result<f64> {
        match dir {
            Some(nu) => self.est.eval(x, nu),
            None => self.min_over_directions(x),
        }
    }

    pub fn min_over_directions(&self, x: &[f64]) -> Result<f64> {
        if x.len() == 2 && self.est.density().dim() == 2 {
            let p = [x[0], x[1]];
            return Ok(self.fallback_dirs.iter().map(|nu| self.est.eval_angle(p, nu.angle())).fold(f64::INFINITY, f64::min));
        }
        let mut best = f64::INFINITY;
        for nu in &self.fallback_dirs {
            best = best.min(self.est.eval(x, nu)?);
        }
        Ok(best)
    }

    /// Slice integral for the line through `x` whose normal is parallel to
    /// the nonzero vector `v` (2D). Band estimates use the tabulated normals.
    pub(crate) fn eval_vec(&self, x: [f64; 2], v: [f64; 2]) -> f64 {
        self.est.eval_angle(x, v[1].atan2(v[0]))
    }

    pub(crate) fn eval_angle(&self, x: [f64; 2], theta: f64) -> f64 {
        self.est.eval_angle(x, theta)
    }

}

/// One-shot evaluation of the right-hand side at `x`. With no gradient
/// direction, returns the smallest slice integral over the direction grid.
pub fn rhs_at(d: &Density, x: &[f64], grad_dir: Option<&Direction>, cfg: &SolverConfig) -> Result<f64> {
    Rhs::new(d, cfg)?.eval(x, grad_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_center() {
        let d = Density::unit_square();
        let cfg = SolverConfig::default();
        let e1 = Direction::from_angle(0.0);
        assert!((rhs_at(&d, &[0.5, 0.5], Some(&e1), &cfg).unwrap() - 1.0).abs() < 1e-15);
        assert!((rhs_at(&d, &[0.5, 0.5], None, &cfg).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fallback_never_exceeds_directional_value() {
        let d = Density::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let rhs = Rhs::new(&d, &SolverConfig::default()).unwrap();
        let x = [0.2, 0.3];
        let m = rhs.min_over_directions(&x).unwrap();
        for k in 0..50 {
            let nu = Direction::from_angle(k as f64 * 0.13);
            assert!(m <= rhs.eval(&x, Some(&nu)).unwrap() + 1e-3);
        }
    }
}
