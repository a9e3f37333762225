//! Tukey depth by direct minimization of the halfspace mass over directions.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::direction::{angle_grid, Direction};
use crate::error::{DepthError, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionSearchConfig {
    pub coarse_count: usize,
    pub refine_iters: usize,
    /// Bracket width (radians) at which golden-section refinement stops.
    pub refine_tol: f64,
    /// Refined minima closer than this (radians) are merged.
    pub cluster_tol: f64,
    /// Minima within this of the global minimum count as argmins.
    pub value_tol: f64,
}

impl Default for DirectionSearchConfig {
    fn default() -> Self {
        DirectionSearchConfig { coarse_count: 360, refine_iters: 100, refine_tol: 1e-6, cluster_tol: 1e-3, value_tol: 1e-6 }
    }
}

impl DirectionSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_count < 8 {
            return Err(DepthError::InvalidConfig(format!("coarse_count must be >= 8, got {}", self.coarse_count)));
        }
        if !(self.refine_tol > 0.0) || !(self.value_tol >= 0.0) {
            return Err(DepthError::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.cluster_tol >= self.refine_tol) {
            return Err(DepthError::InvalidConfig("cluster_tol must be >= refine_tol".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthResult {
    pub depth: f64,
    /// One representative direction per argmin cluster. Empty outside the
    /// support hull, where the depth is zero by definition.
    pub argmin_dirs: Vec<Direction>,
    /// Second-best local minimum minus the depth; 0 when the argmin is not
    /// unique and infinite when there is no other local minimum.
    pub gap: f64,
}

impl DepthResult {
    pub fn is_unique(&self) -> bool {
        self.argmin_dirs.len() == 1
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
fn golden<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, tol: f64, max_iters: usize, mut f: F) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iters {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Tukey depth `T(x) = min_ν Z(x, ν)` with the clustered set of minimizers.
pub fn tukey_depth(d: &Density, x: &[f64], cfg: &DirectionSearchConfig) -> Result<DepthResult> {
    cfg.validate()?;
    if x.len() != d.dim() {
        return Err(DepthError::DimensionMismatch { expected: d.dim(), got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DepthError::Domain("query point is not finite".into()));
    }
    if d.hull_margin(x).is_some_and(|m| m <= 0.0) {
        return Ok(DepthResult { depth: 0.0, argmin_dirs: Vec::new(), gap: 0.0 });
    }
    if d.dim() == 1 {
        return Ok(depth_1d(d, x, cfg));
    }
    Ok(depth_2d(d, [x[0], x[1]], cfg))
}

fn depth_1d(d: &Density, x: &[f64], cfg: &DirectionSearchConfig) -> DepthResult {
    let up = Direction::along_1d(1.0);
    let down = Direction::along_1d(-1.0);
    let zu = d.halfspace_mass_unchecked(x, up.as_array());
    let zd = d.halfspace_mass_unchecked(x, down.as_array());
    let depth = zu.min(zd);
    let mut argmin_dirs = Vec::new();
    if zu <= depth + cfg.value_tol {
        argmin_dirs.push(up);
    }
    if zd <= depth + cfg.value_tol {
        argmin_dirs.push(down);
    }
    let gap = if argmin_dirs.len() > 1 { 0.0 } else { zu.max(zd) - depth };
    DepthResult { depth, argmin_dirs, gap }
}

fn depth_2d(d: &Density, x: Point2, cfg: &DirectionSearchConfig) -> DepthResult {
    let z = |theta: f64| {
        let (s, c) = theta.sin_cos();
        d.halfspace_mass_unchecked(&x, [c, s])
    };
    let m = cfg.coarse_count;
    let step = TAU / m as f64;
    let coarse: Vec<f64> = angle_grid(m).map(z).collect();

    let mut minima: Vec<(f64, f64)> = Vec::new();
    for k in 0..m {
        let prev = coarse[(k + m - 1) % m];
        let next = coarse[(k + 1) % m];
        // tolerate rounding noise so plateaus count as minima everywhere
        if coarse[k] <= prev + 1e-14 && coarse[k] <= next + 1e-14 {
            let theta_k = k as f64 * step;
            let (tg, zg) = golden(theta_k - step, theta_k + step, cfg.refine_tol, cfg.refine_iters, z);
            // keep the grid angle unless refinement strictly improves on it
            if zg < coarse[k] - 1e-14 {
                minima.push((tg.rem_euclid(TAU), zg));
            } else {
                minima.push((theta_k, coarse[k]));
            }
        }
    }

    let depth = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let (best, rest): (Vec<_>, Vec<_>) = minima.into_iter().partition(|m| m.1 <= depth + cfg.value_tol);
    let best = cluster(best, cfg.cluster_tol);
    let rest = cluster(rest, cfg.cluster_tol);
    let gap = if best.len() > 1 {
        0.0
    } else {
        rest.iter().map(|m| m.1 - depth).fold(f64::INFINITY, f64::min)
    };
    DepthResult {
        depth: depth.clamp(0.0, 1.0),
        argmin_dirs: best.iter().map(|m| Direction::from_angle(m.0)).collect(),
        gap,
    }
}

/// Merges angles closer than `tol` (cyclically), keeping the lowest value of
/// each group. Output is sorted by angle.
fn cluster(mut pts: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    if pts.is_empty() {
        return pts;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // (first angle, last angle, best angle, best value)
    let mut groups: Vec<(f64, f64, f64, f64)> = Vec::new();
    for (t, v) in pts {
        match groups.last_mut() {
            Some(g) if t - g.1 <= tol => {
                g.1 = t;
                if v < g.3 {
                    g.2 = t;
                    g.3 = v;
                }
            }
            _ => groups.push((t, t, t, v)),
        }
    }
    if groups.len() > 1 {
        let last = *groups.last().unwrap();
        if groups[0].0 + TAU - last.1 <= tol {
            groups.pop();
            if last.3 < groups[0].3 {
                groups[0].2 = last.2;
                groups[0].3 = last.3;
            }
        }
    }
    groups.into_iter().map(|g| (g.2, g.3)).collect()
}

/// [`tukey_depth`] at many points in parallel; output order matches input.
pub fn tukey_depth_many(d: &Density, pts: &[Point2], cfg: &DirectionSearchConfig) -> Result<Vec<DepthResult>> {
    let dim = d.dim();
    pts.par_iter().map(|p| tukey_depth(d, &p[..dim], cfg)).collect()
}

/// Central finite difference of the depth. Errors when the argmin at `x` is
/// not unique, since the depth is not differentiable there.
pub fn depth_gradient_fd(d: &Density, x: &[f64], step: f64, cfg: &DirectionSearchConfig) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(DepthError::InvalidConfig(format!("step must be positive, got {step}")));
    }
    let here = tukey_depth(d, x, cfg)?;
    if here.argmin_dirs.len() > 1 {
        return Err(DepthError::NonUniqueArgmin { clusters: here.argmin_dirs.len() });
    }
    let mut grad = vec![0.0; x.len()];
    for (k, g) in grad.iter_mut().enumerate() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += step;
        xm[k] -= step;
        *g = (tukey_depth(d, &xp, cfg)?.depth - tukey_depth(d, &xm, cfg)?.depth) / (2.0 * step);
    }
    Ok(grad)
}

/// `|ℓ₋ − ℓ₊|` where `ℓ₋, ℓ₊` are the lengths of the chord along `ν⊥` on
/// either side of `x`.
pub fn check_balanced_chord(d: &Density, x: &[f64], nu: &Direction) -> Result<f64> {
    let poly = d.as_uniform_polygon().ok_or(DepthError::NotUniformConvex)?;
    if x.len() != 2 || nu.dim() != 2 {
        return Err(DepthError::DimensionMismatch { expected: 2, got: x.len().min(nu.dim()) });
    }
    let t = nu.perp();
    match poly.chord([x[0], x[1]], t.as_array()) {
        Some((t0, t1)) => Ok((t0 + t1).abs()),
        None => Ok(0.0),
    }
}

/// Generators `−ν slice(x, ν)` of the superdifferential, one per argmin cluster.
pub fn superdifferential_hull(d: &Density, x: &[f64], cfg: &DirectionSearchConfig) -> Result<Vec<Vec<f64>>> {
    let res = tukey_depth(d, x, cfg)?;
    res.argmin_dirs
        .iter()
        .map(|nu| {
            let s = d.slice_integral_analytic(x, nu)?;
            Ok(nu.components().iter().map(|c| -c * s).collect())
        })
        .collect()
}

/// Monte-Carlo halfspace mass from `n` samples, for cross-checking closed forms.
pub fn halfspace_mass_mc(d: &Density, x: &[f64], nu: &Direction, n: usize, seed: u64) -> Result<f64> {
    if x.len() != d.dim() {
        return Err(DepthError::DimensionMismatch { expected: d.dim(), got: x.len() });
    }
    if n == 0 {
        return Err(DepthError::Estimator("need at least one sample".into()));
    }
    let c = nu.dot(x);
    let hits = d.sample(n, seed).iter().filter(|p| nu.dot(&p[..d.dim()]) >= c).count();
    Ok(hits as f64 / n as f64)
}

/// Monte-Carlo estimate of the total mass inside `[lo, hi]` (2D), for
/// normalization checks.
pub fn mass_in_box_mc(d: &Density, lo: Point2, hi: Point2, n: usize, seed: u64) -> Result<f64> {
    if d.dim() != 2 {
        return Err(DepthError::DimensionMismatch { expected: 2, got: d.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let mut s = 0.0;
    for _ in 0..n {
        let p = [lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(), lo[1] + (hi[1] - lo[1]) * rng.random::<f64>()];
        s += d.eval(&p)?;
    }
    Ok(s * area / n as f64)
}
