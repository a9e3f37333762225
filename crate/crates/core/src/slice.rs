//! Slice integrals: exact, or estimated from a random sample by counting the
//! points within a band of half-width `h` around the line.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::direction::Direction;
use crate::error::{DepthError, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceMethod {
    Analytic,
    SampleBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceEstimatorConfig {
    pub method: SliceMethod,
    pub sample_count: usize,
    /// Band half-width. `None` picks 1/100 of the domain diameter.
    pub band_halfwidth: Option<f64>,
    pub rng_seed: u64,
}

impl Default for SliceEstimatorConfig {
    fn default() -> Self {
        SliceEstimatorConfig { method: SliceMethod::Analytic, sample_count: 12_000, band_halfwidth: None, rng_seed: 0 }
    }
}

impl SliceEstimatorConfig {
    pub fn analytic() -> Self {
        Self::default()
    }

    pub fn band(sample_count: usize, band_halfwidth: Option<f64>, rng_seed: u64) -> Self {
        SliceEstimatorConfig { method: SliceMethod::SampleBand, sample_count, band_halfwidth, rng_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == SliceMethod::SampleBand {
            if self.sample_count == 0 {
                return Err(DepthError::InvalidConfig("band estimator needs at least one sample".into()));
            }
            if let Some(h) = self.band_halfwidth {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(DepthError::InvalidConfig(format!("band half-width must be positive, got {h}")));
                }
            }
        }
        Ok(())
    }
}

/// Length scale used for the default band: diameter of the support hull, or of
/// the central 98% box for unbounded densities.
pub fn domain_diameter(d: &Density) -> f64 {
    if d.dim() == 1 {
        return match d.support() {
            crate::density::Support::Interval(a, b) => b - a,
            _ => 1.0,
        };
    }
    if let Some(p) = d.as_uniform_polygon() {
        return p.diameter();
    }
    if let Some((lo, hi)) = d.bounding_box() {
        return (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    }
    let s = d.sample_stream(4000, 0, u64::MAX);
    let (lo, hi) = central_box(&s, 0.01);
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}

/// Per-axis `[q, 1-q]` quantile box of a point set.
fn central_box(pts: &[Point2], q: f64) -> (Point2, Point2) {
    let mut lo = [0.0; 2];
    let mut hi = [0.0; 2];
    for k in 0..2 {
        let mut v: Vec<f64> = pts.iter().map(|p| p[k]).collect();
        v.sort_by(f64::total_cmp);
        let i = ((q * v.len() as f64) as usize).min(v.len() - 1);
        lo[k] = v[i];
        hi[k] = v[v.len() - 1 - i];
    }
    (lo, hi)
}

/// A slice-integral evaluator bound to one density. For the band method the
/// sample is drawn once and indexed by a uniform bucket grid.
#[derive(Debug, Clone)]
pub struct SliceEstimator<'a> {
    density: &'a Density,
    cfg: SliceEstimatorConfig,
    band: Option<BandIndex>,
    table: OnceLock<ProjectionTable>,
}

/// Number of tabulated normals in `[0, π)` used by [`SliceEstimator::eval_angle`].
pub const TABLE_DIRECTIONS: usize = 720;

impl<'a> SliceEstimator<'a> {
    pub fn new(density: &'a Density, cfg: SliceEstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let band = match cfg.method {
            SliceMethod::Analytic => None,
            SliceMethod::SampleBand => {
                let h = cfg.band_halfwidth.unwrap_or_else(|| domain_diameter(density) / 100.0);
                let pts = density.sample(cfg.sample_count, cfg.rng_seed);
                Some(BandIndex::build(pts, h, density.dim()))
            }
        };
        Ok(SliceEstimator { density, cfg, band, table: OnceLock::new() })
    }

    pub fn config(&self) -> &SliceEstimatorConfig {
        &self.cfg
    }

    pub fn density(&self) -> &Density {
        self.density
    }

    /// Band half-width in use, if estimating from samples.
    pub fn band_halfwidth(&self) -> Option<f64> {
        self.band.as_ref().map(|b| b.h)
    }

    pub fn eval(&self, x: &[f64], nu: &Direction) -> Result<f64> {
        match &self.band {
            None => self.density.slice_integral_analytic(x, nu),
            Some(b) => {
                if x.len() != self.density.dim() {
                    return Err(DepthError::DimensionMismatch { expected: self.density.dim(), got: x.len() });
                }
                if nu.dim() != self.density.dim() {
                    return Err(DepthError::DimensionMismatch { expected: self.density.dim(), got: nu.dim() });
                }
                let p = [x[0], x.get(1).copied().unwrap_or(0.0)];
                Ok(b.estimate(p, nu.as_array()))
            }
        }
    }
}

impl SliceEstimator<'_> {
    /// Slice integral for the normal at angle `theta` (2D only, unchecked).
    /// Exact for the analytic method. The band method counts samples against
    /// projections sorted once per tabulated normal and interpolates linearly
    /// in angle between the two nearest, which agrees with [`Self::eval`] at
    /// the tabulated angles.
    pub fn eval_angle(&self, x: Point2, theta: f64) -> f64 {
        match &self.band {
            None => self.density.slice_unchecked(&x, [theta.cos(), theta.sin()]),
            Some(b) => {
                let t = self.table.get_or_init(|| ProjectionTable::build(b));
                t.estimate(x, theta)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct ProjectionTable {
    h: f64,
    n_total: usize,
    normals: Vec<Point2>,
    /// `TABLE_DIRECTIONS` runs of sorted projections, `n_total` each.
    proj: Vec<f64>,
}

impl ProjectionTable {
    fn build(b: &BandIndex) -> Self {
        let n = b.n_total;
        let all: Vec<Point2> = b.pts.iter().chain(&b.overflow).copied().collect();
        let normals: Vec<Point2> = (0..TABLE_DIRECTIONS)
            .map(|k| {
                let th = PI * k as f64 / TABLE_DIRECTIONS as f64;
                [th.cos(), th.sin()]
            })
            .collect();
        let mut proj = Vec::with_capacity(n * TABLE_DIRECTIONS);
        for nu in &normals {
            let start = proj.len();
            proj.extend(all.iter().map(|p| nu[0] * p[0] + nu[1] * p[1]));
            proj[start..].sort_unstable_by(f64::total_cmp);
        }
        ProjectionTable { h: b.h, n_total: n, normals, proj }
    }

    fn count(&self, k: usize, x: Point2) -> usize {
        let nu = self.normals[k];
        let c = nu[0] * x[0] + nu[1] * x[1];
        let run = &self.proj[k * self.n_total..(k + 1) * self.n_total];
        run.partition_point(|&v| v <= c + self.h) - run.partition_point(|&v| v < c - self.h)
    }

    fn estimate(&self, x: Point2, theta: f64) -> f64 {
        let t = theta.rem_euclid(PI) / PI * TABLE_DIRECTIONS as f64;
        let r = t.round();
        let t = if (t - r).abs() < 1e-9 { r } else { t };
        let k = t.floor() as usize % TABLE_DIRECTIONS;
        let w = t - t.floor();
        let c0 = self.count(k, x) as f64;
        let c = if w > 0.0 { c0 * (1.0 - w) + self.count((k + 1) % TABLE_DIRECTIONS, x) as f64 * w } else { c0 };
        c / (2.0 * self.h * self.n_total as f64)
    }
}

/// One-shot slice integral. Building a [`SliceEstimator`] is cheaper when
/// evaluating many points with the band method.
pub fn slice_integral(d: &Density, x: &[f64], nu: &Direction, cfg: &SliceEstimatorConfig) -> Result<f64> {
    SliceEstimator::new(d, *cfg)?.eval(x, nu)
}

#[derive(Debug, Clone)]
struct BandIndex {
    h: f64,
    n_total: usize,
    dim: usize,
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    /// Samples sorted by bucket; bucket `b` owns `pts[starts[b]..starts[b+1]]`.
    pts: Vec<Point2>,
    starts: Vec<usize>,
    /// Samples outside the bucket grid, always scanned.
    overflow: Vec<Point2>,
}

impl BandIndex {
    fn build(all: Vec<Point2>, h: f64, dim: usize) -> Self {
        let n_total = all.len();
        if dim == 1 {
            let mut pts = all;
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
            return BandIndex {
                h,
                n_total,
                dim,
                origin: [0.0; 2],
                cell: 1.0,
                nx: 0,
                ny: 0,
                pts,
                starts: Vec::new(),
                overflow: Vec::new(),
            };
        }
        let (lo, hi) = central_box(&all, 0.002);
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let target = ((n_total as f64).sqrt() / 2.0).clamp(1.0, 256.0);
        let cell = (span / target).max(h);
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
        let mut keyed = Vec::with_capacity(n_total);
        let mut overflow = Vec::new();
        for p in all {
            let i = ((p[0] - lo[0]) / cell).floor();
            let j = ((p[1] - lo[1]) / cell).floor();
            if i >= 0.0 && j >= 0.0 && (i as usize) < nx && (j as usize) < ny {
                keyed.push((j as usize * nx + i as usize, p));
            } else {
                overflow.push(p);
            }
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1[0].total_cmp(&b.1[0])).then(a.1[1].total_cmp(&b.1[1])));
        let mut starts = vec![0usize; nx * ny + 1];
        for (b, _) in &keyed {
            starts[b + 1] += 1;
        }
        for b in 0..nx * ny {
            starts[b + 1] += starts[b];
        }
        BandIndex {
            h,
            n_total,
            dim,
            origin: lo,
            cell,
            nx,
            ny,
            pts: keyed.into_iter().map(|(_, p)| p).collect(),
            starts,
            overflow,
        }
    }

    fn estimate(&self, x: Point2, nu: Point2) -> f64 {
        self.count(x, nu) as f64 / (2.0 * self.h * self.n_total as f64)
    }

    fn count(&self, x: Point2, nu: Point2) -> usize {
        let h = self.h;
        if self.dim == 1 {
            let lo = self.pts.partition_point(|p| p[0] < x[0] - h);
            let hi = self.pts.partition_point(|p| p[0] <= x[0] + h);
            return hi - lo;
        }
        let c = nu[0] * x[0] + nu[1] * x[1];
        let hit = |p: &Point2| (nu[0] * p[0] + nu[1] * p[1] - c).abs() <= h;
        let mut n = self.overflow.iter().filter(|p| hit(p)).count();
        // Walk the strip along the axis the line is closer to, one column (or
        // row) of buckets at a time.
        let (major, minor) = if nu[1].abs() >= nu[0].abs() { (0, 1) } else { (1, 0) };
        let n_major = if major == 0 { self.nx } else { self.ny };
        let n_minor = if major == 0 { self.ny } else { self.nx };
        for a in 0..n_major {
            let s0 = self.origin[major] + a as f64 * self.cell;
            let s1 = s0 + self.cell;
            // minor-coordinate range of the strip over [s0, s1]
            let mut m_lo = f64::INFINITY;
            let mut m_hi = f64::NEG_INFINITY;
            for s in [s0, s1] {
                for off in [-h, h] {
                    let m = (c + off - nu[major] * s) / nu[minor];
                    m_lo = m_lo.min(m);
                    m_hi = m_hi.max(m);
                }
            }
            let b0 = ((m_lo - self.origin[minor]) / self.cell).floor().max(0.0);
            let b1 = ((m_hi - self.origin[minor]) / self.cell).floor();
            if b1 < 0.0 || b0 >= n_minor as f64 {
                continue;
            }
            let (b0, b1) = (b0 as usize, (b1 as usize).min(n_minor - 1));
            for b in b0..=b1 {
                let (i, j) = if major == 0 { (a, b) } else { (b, a) };
                let k = j * self.nx + i;
                n += self.pts[self.starts[k]..self.starts[k + 1]].iter().filter(|p| hit(p)).count();
            }
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(pts: &[Point2], x: Point2, nu: Point2, h: f64) -> usize {
        pts.iter().filter(|p| (nu[0] * (p[0] - x[0]) + nu[1] * (p[1] - x[1])).abs() <= h).count()
    }

    #[test]
    fn bucket_walk_matches_brute_force() {
        for d in [Density::unit_square(), Density::cauchy([0.0, 0.0], 1.0).unwrap(), Density::standard_gaussian()] {
            let pts = d.sample(5000, 3);
            let idx = BandIndex::build(pts.clone(), 0.02, 2);
            for k in 0..60 {
                let th = k as f64 * 0.1047;
                let nu = [th.cos(), th.sin()];
                let x = [0.5 + 0.3 * (k as f64).sin(), 0.4 + 0.2 * (k as f64 * 0.7).cos()];
                assert_eq!(idx.count(x, nu), brute(&pts, x, nu, 0.02), "{} k={k}", d.kind_name());
            }
        }
    }

    #[test]
    fn tabulated_angles_match_exact_band() {
        let d = Density::cauchy([0.0, 0.0], 1.0).unwrap();
        let est = SliceEstimator::new(&d, SliceEstimatorConfig::band(3000, Some(0.05), 1)).unwrap();
        for k in [0usize, 1, 17, 359, 360, 511, 719] {
            let th = PI * k as f64 / TABLE_DIRECTIONS as f64;
            let x = [0.3 * k as f64 / 100.0, -0.2];
            let exact = est.eval(&x, &Direction::from_angle(th)).unwrap();
            assert_eq!(est.eval_angle(x, th), exact, "k={k}");
        }
        // half-way between two tabulated normals
        let th = PI * 10.5 / TABLE_DIRECTIONS as f64;
        let a = est.eval_angle([0.1, 0.1], PI * 10.0 / TABLE_DIRECTIONS as f64);
        let b = est.eval_angle([0.1, 0.1], PI * 11.0 / TABLE_DIRECTIONS as f64);
        assert!((est.eval_angle([0.1, 0.1], th) - 0.5 * (a + b)).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_band_is_local_density() {
        let d = Density::uniform_1d(0.0, 1.0).unwrap();
        let est = SliceEstimator::new(&d, SliceEstimatorConfig::band(100_000, Some(0.01), 0)).unwrap();
        let v = est.eval(&[0.5], &Direction::along_1d(1.0)).unwrap();
        assert!((v - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn rejects_bad_config() {
        let d = Density::unit_square();
        assert!(SliceEstimator::new(&d, SliceEstimatorConfig::band(0, None, 0)).is_err());
        assert!(SliceEstimator::new(&d, SliceEstimatorConfig::band(10, Some(-1.0), 0)).is_err());
    }

    #[test]
    fn default_band_is_one_percent_of_diameter() {
        let d = Density::unit_square();
        let est = SliceEstimator::new(&d, SliceEstimatorConfig::band(10, None, 0)).unwrap();
        assert!((est.band_halfwidth().unwrap() - 2f64.sqrt() / 100.0).abs() < 1e-15);
    }
}
