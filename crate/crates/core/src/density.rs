//! Probability density models on ℝ¹ and ℝ², with the three primitives the
//! depth computations need: pointwise density, halfspace mass
//! `Z(x, ν) = μ{y : y·ν ≥ x·ν}`, and the slice integral of the density over
//! the hyperplane through `x` with normal `ν`.
//!
//! Every kind here has an exact (or quadrature-exact) halfspace mass and slice
//! integral. The Gaussian and Cauchy formulas use the fact that both families
//! are closed under projection onto a line: the slice integral is the density
//! of `ν·Y` evaluated at `ν·x`, and the halfspace mass is its upper tail.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::direction::Direction;
use crate::error::{DepthError, Result};
use crate::geometry::{cross, dot, AffineMap, ConvexPolygon, Point2};
use crate::quadrature;
use crate::valley::ValleyPsi;

/// Serializable description of a density, as stored in density JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform1d {
        a: f64,
        b: f64,
    },
    /// Linear interpolation of `(x, weight)` knots, zero outside; normalized on load.
    PiecewiseLinear1d {
        knots: Vec<[f64; 2]>,
    },
    UniformConvexPolygon {
        vertices: ConvexPolygon,
    },
    Gaussian2d {
        mean: Point2,
        covariance: [[f64; 2]; 2],
    },
    Cauchy2d {
        center: Point2,
        scale: f64,
    },
    Valley {
        epsilon: f64,
    },
    /// Law of `L⁻¹(X)` for `X ~ base`, i.e. density `x ↦ ρ_base(L x)·|det L|`.
    Affine {
        base: Box<DensitySpec>,
        map: AffineMap,
    },
}

/// A validated density with its normalization constants precomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensitySpec", into = "DensitySpec")]
pub struct Density {
    spec: DensitySpec,
    model: Model,
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Uniform1d {
        a: f64,
        b: f64,
    },
    PiecewiseLinear1d {
        xs: Vec<f64>,
        ys: Vec<f64>,
        /// CDF at each knot.
        cdf: Vec<f64>,
    },
    Polygon {
        poly: ConvexPolygon,
        height: f64,
    },
    Gaussian {
        mean: Point2,
        cov: [[f64; 2]; 2],
        inv: [[f64; 2]; 2],
        chol: [[f64; 2]; 2],
        norm: f64,
    },
    Cauchy {
        center: Point2,
        scale: f64,
    },
    Valley {
        psi: ValleyPsi,
        c: f64,
    },
    Affine {
        base: Box<Density>,
        map: AffineMap,
        inv: AffineMap,
        abs_det: f64,
    },
}

impl TryFrom<DensitySpec> for Density {
    type Error = DepthError;

    fn try_from(spec: DensitySpec) -> Result<Self> {
        Density::new(spec)
    }
}

impl From<Density> for DensitySpec {
    fn from(d: Density) -> Self {
        d.spec
    }
}

/// Support geometry of a density, as far as the solver needs it.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Interval(f64, f64),
    Polygon(ConvexPolygon),
    UnitDisk,
    /// Unbounded support; boundary data must come from a truncation box.
    Unbounded,
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / TAU.sqrt()
}

/// Upper tail `P(N(0,1) ≥ z)`.
fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn check_dim(p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(DepthError::DimensionMismatch { expected: dim, got: p.len() });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(DepthError::Domain("point is not finite".into()));
    }
    Ok(())
}

impl Density {
    pub fn new(spec: DensitySpec) -> Result<Self> {
        let model = match &spec {
            DensitySpec::Uniform1d { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(DepthError::Domain(format!("uniform interval [{a}, {b}] is empty")));
                }
                Model::Uniform1d { a: *a, b: *b }
            }
            DensitySpec::PiecewiseLinear1d { knots } => {
                if knots.len() < 2 {
                    return Err(DepthError::Domain("need at least two knots".into()));
                }
                let xs: Vec<f64> = knots.iter().map(|k| k[0]).collect();
                let raw: Vec<f64> = knots.iter().map(|k| k[1]).collect();
                if xs.windows(2).any(|w| !(w[0] < w[1])) || raw.iter().any(|y| !(*y >= 0.0)) {
                    return Err(DepthError::Domain(
                        "knots must be strictly increasing with non-negative weights".into(),
                    ));
                }
                let mass: f64 = (1..xs.len())
                    .map(|i| 0.5 * (xs[i] - xs[i - 1]) * (raw[i] + raw[i - 1]))
                    .sum();
                if !(mass > 0.0) {
                    return Err(DepthError::Domain("piecewise-linear density has zero mass".into()));
                }
                let ys: Vec<f64> = raw.iter().map(|y| y / mass).collect();
                let mut cdf = vec![0.0; xs.len()];
                for i in 1..xs.len() {
                    cdf[i] = cdf[i - 1] + 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
                }
                Model::PiecewiseLinear1d { xs, ys, cdf }
            }
            DensitySpec::UniformConvexPolygon { vertices } => Model::Polygon {
                height: 1.0 / vertices.area(),
                poly: vertices.clone(),
            },
            DensitySpec::Gaussian2d { mean, covariance } => {
                let c = *covariance;
                let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
                if (c[0][1] - c[1][0]).abs() > 1e-12 * (c[0][0].abs() + c[1][1].abs())
                    || !(c[0][0] > 0.0)
                    || !(det > 0.0)
                {
                    return Err(DepthError::Domain("covariance must be symmetric positive definite".into()));
                }
                let inv = [[c[1][1] / det, -c[0][1] / det], [-c[1][0] / det, c[0][0] / det]];
                let l00 = c[0][0].sqrt();
                let l10 = c[1][0] / l00;
                let l11 = (c[1][1] - l10 * l10).sqrt();
                Model::Gaussian {
                    mean: *mean,
                    cov: c,
                    inv,
                    chol: [[l00, 0.0], [l10, l11]],
                    norm: 1.0 / (TAU * det.sqrt()),
                }
            }
            DensitySpec::Cauchy2d { center, scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(DepthError::Domain(format!("Cauchy scale must be positive, got {scale}")));
                }
                Model::Cauchy { center: *center, scale: *scale }
            }
            DensitySpec::Valley { epsilon } => {
                let psi = ValleyPsi::new(*epsilon)?;
                // ∫∫ C r ψ(θ) r dr dθ = C ∫ψ / 3 = 1
                let c = 3.0 / psi.integral();
                Model::Valley { psi, c }
            }
            DensitySpec::Affine { base, map } => {
                let base = Density::new((**base).clone())?;
                if base.dim() != 2 {
                    return Err(DepthError::DimensionMismatch { expected: 2, got: base.dim() });
                }
                let inv = map.inverse()?;
                Model::Affine { base: Box::new(base), map: *map, inv, abs_det: map.det().abs() }
            }
        };
        Ok(Density { spec, model })
    }

    pub fn uniform_1d(a: f64, b: f64) -> Result<Self> {
        Self::new(DensitySpec::Uniform1d { a, b })
    }

    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        Self::new(DensitySpec::UniformConvexPolygon { vertices: ConvexPolygon::new(vertices)? })
    }

    pub fn unit_square() -> Self {
        Self::new(DensitySpec::UniformConvexPolygon { vertices: ConvexPolygon::unit_square() }).unwrap()
    }

    pub fn gaussian(mean: Point2, covariance: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(DensitySpec::Gaussian2d { mean, covariance })
    }

    pub fn standard_gaussian() -> Self {
        Self::gaussian([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    pub fn cauchy(center: Point2, scale: f64) -> Result<Self> {
        Self::new(DensitySpec::Cauchy2d { center, scale })
    }

    pub fn valley(epsilon: f64) -> Result<Self> {
        Self::new(DensitySpec::Valley { epsilon })
    }

    pub fn spec(&self) -> &DensitySpec {
        &self.spec
    }

    pub fn kind_name(&self) -> &'static str {
        match self.spec {
            DensitySpec::Uniform1d { .. } => "uniform_1d",
            DensitySpec::PiecewiseLinear1d { .. } => "piecewise_linear_1d",
            DensitySpec::UniformConvexPolygon { .. } => "uniform_convex_polygon",
            DensitySpec::Gaussian2d { .. } => "gaussian_2d",
            DensitySpec::Cauchy2d { .. } => "cauchy_2d",
            DensitySpec::Valley { .. } => "valley",
            DensitySpec::Affine { .. } => "affine",
        }
    }

    pub fn dim(&self) -> usize {
        match self.model {
            Model::Uniform1d { .. } | Model::PiecewiseLinear1d { .. } => 1,
            _ => 2,
        }
    }

    /// The uniform-polygon support, if this is a uniform density on a convex polygon.
    pub fn as_uniform_polygon(&self) -> Option<&ConvexPolygon> {
        match &self.model {
            Model::Polygon { poly, .. } => Some(poly),
            _ => None,
        }
    }

    /// Valley-density normalization constant `C`, if applicable.
    pub fn valley_constant(&self) -> Option<f64> {
        match &self.model {
            Model::Valley { c, .. } => Some(*c),
            _ => None,
        }
    }

    pub fn support(&self) -> Support {
        match &self.model {
            Model::Uniform1d { a, b } => Support::Interval(*a, *b),
            Model::PiecewiseLinear1d { xs, .. } => Support::Interval(xs[0], xs[xs.len() - 1]),
            Model::Polygon { poly, .. } => Support::Polygon(poly.clone()),
            Model::Valley { .. } => Support::UnitDisk,
            Model::Gaussian { .. } | Model::Cauchy { .. } => Support::Unbounded,
            Model::Affine { base, inv, .. } => match base.support() {
                Support::Polygon(p) => {
                    let v = p.vertices().iter().map(|&q| inv.apply(q)).collect::<Vec<_>>();
                    match ConvexPolygon::new(v.clone()) {
                        Ok(poly) => Support::Polygon(poly),
                        // orientation-reversing map
                        Err(_) => Support::Polygon(
                            ConvexPolygon::new(v.into_iter().rev().collect()).expect("affine image of convex polygon"),
                        ),
                    }
                }
                Support::Unbounded => Support::Unbounded,
                // ellipse or interval: only the containment test and bbox are needed
                other => other,
            },
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.support(), Support::Unbounded)
    }

    /// Axis-aligned bounding box of the support's convex hull (2D, bounded only).
    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        match &self.model {
            Model::Polygon { poly, .. } => Some(poly.bbox()),
            Model::Valley { .. } => Some(([-1.0, -1.0], [1.0, 1.0])),
            Model::Affine { base, inv, .. } => {
                let (lo, hi) = base.bounding_box()?;
                let corners = [lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
                let mut blo = [f64::INFINITY; 2];
                let mut bhi = [f64::NEG_INFINITY; 2];
                for c in corners {
                    let q = inv.apply(c);
                    for k in 0..2 {
                        blo[k] = blo[k].min(q[k]);
                        bhi[k] = bhi[k].max(q[k]);
                    }
                }
                Some((blo, bhi))
            }
            _ => None,
        }
    }

    /// Signed distance-like margin of `x` inside the support's convex hull:
    /// positive strictly inside, `<= 0` on the boundary or outside. `None` for
    /// unbounded supports.
    pub fn hull_margin(&self, x: &[f64]) -> Option<f64> {
        match &self.model {
            Model::Uniform1d { a, b } => Some((x[0] - a).min(b - x[0])),
            Model::PiecewiseLinear1d { xs, .. } => Some((x[0] - xs[0]).min(xs[xs.len() - 1] - x[0])),
            Model::Polygon { poly, .. } => Some(poly.inset_distance([x[0], x[1]])),
            Model::Valley { .. } => Some(1.0 - x[0].hypot(x[1])),
            Model::Gaussian { .. } | Model::Cauchy { .. } => None,
            Model::Affine { base, map, .. } => base.hull_margin(&map.apply([x[0], x[1]])),
        }
    }

    /// `ρ(x)`; zero outside the support.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(x, self.dim())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.model {
            Model::Uniform1d { a, b } => {
                if x[0] >= *a && x[0] <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Model::PiecewiseLinear1d { xs, ys, .. } => pl_eval(xs, ys, x[0]),
            Model::Polygon { poly, height } => {
                if poly.contains([x[0], x[1]]) {
                    *height
                } else {
                    0.0
                }
            }
            Model::Gaussian { mean, inv, norm, .. } => {
                let d = [x[0] - mean[0], x[1] - mean[1]];
                let q = d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1]);
                norm * (-0.5 * q).exp()
            }
            Model::Cauchy { center, scale } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                scale / (TAU * (r2 + scale * scale).powf(1.5))
            }
            Model::Valley { psi, c } => {
                let r = x[0].hypot(x[1]);
                if r > 1.0 {
                    0.0
                } else {
                    c * r * psi.eval(x[1].atan2(x[0]))
                }
            }
            Model::Affine { base, map, abs_det, .. } => base.eval_unchecked(&map.apply([x[0], x[1]])) * abs_det,
        }
    }

    /// Halfspace mass `Z(x, ν) = μ({y : y·ν ≥ x·ν})`.
    pub fn halfspace_mass(&self, x: &[f64], nu: &Direction) -> Result<f64> {
        check_dim(x, self.dim())?;
        if nu.dim() != self.dim() {
            return Err(DepthError::DimensionMismatch { expected: self.dim(), got: nu.dim() });
        }
        Ok(self.halfspace_mass_unchecked(x, nu.as_array()))
    }

    pub(crate) fn halfspace_mass_unchecked(&self, x: &[f64], nu: Point2) -> f64 {
        let z = match &self.model {
            Model::Uniform1d { a, b } => {
                let cdf = ((x[0] - a) / (b - a)).clamp(0.0, 1.0);
                if nu[0] > 0.0 {
                    1.0 - cdf
                } else {
                    cdf
                }
            }
            Model::PiecewiseLinear1d { xs, ys, cdf } => {
                let f = pl_cdf(xs, ys, cdf, x[0]);
                if nu[0] > 0.0 {
                    1.0 - f
                } else {
                    f
                }
            }
            Model::Polygon { poly, height } => poly.clipped_area(nu, nu[0] * x[0] + nu[1] * x[1]) * height,
            Model::Gaussian { mean, cov, .. } => {
                let (s, d) = gaussian_projection(mean, cov, x, nu);
                std_normal_sf(d / s)
            }
            Model::Cauchy { center, scale } => {
                let d = nu[0] * (x[0] - center[0]) + nu[1] * (x[1] - center[1]);
                0.5 - (d / scale).atan() / PI
            }
            Model::Valley { psi, c } => valley_halfspace_mass(psi, *c, [x[0], x[1]], nu),
            Model::Affine { base, map, inv, .. } => {
                let w = inv.apply_transpose(nu);
                let n = w[0].hypot(w[1]);
                base.halfspace_mass_unchecked(&map.apply([x[0], x[1]]), [w[0] / n, w[1] / n])
            }
        };
        z.clamp(0.0, 1.0)
    }

    /// Exact slice integral `∫_{(y-x)·ν = 0} ρ dH^{n-1}`. In 1D this is `ρ(x)`.
    pub fn slice_integral_analytic(&self, x: &[f64], nu: &Direction) -> Result<f64> {
        check_dim(x, self.dim())?;
        if nu.dim() != self.dim() {
            return Err(DepthError::DimensionMismatch { expected: self.dim(), got: nu.dim() });
        }
        Ok(self.slice_unchecked(x, nu.as_array()))
    }

    pub(crate) fn slice_unchecked(&self, x: &[f64], nu: Point2) -> f64 {
        match &self.model {
            Model::Uniform1d { .. } | Model::PiecewiseLinear1d { .. } => self.eval_unchecked(x),
            Model::Polygon { poly, height } => poly.chord_length([x[0], x[1]], [-nu[1], nu[0]]) * height,
            Model::Gaussian { mean, cov, .. } => {
                let (s, d) = gaussian_projection(mean, cov, x, nu);
                std_normal_pdf(d / s) / s
            }
            Model::Cauchy { center, scale } => {
                let d = nu[0] * (x[0] - center[0]) + nu[1] * (x[1] - center[1]);
                scale / (PI * (d * d + scale * scale))
            }
            Model::Valley { psi, c } => valley_slice(psi, *c, [x[0], x[1]], nu),
            Model::Affine { base, map, inv, .. } => {
                let w = inv.apply_transpose(nu);
                let n = w[0].hypot(w[1]);
                base.slice_unchecked(&map.apply([x[0], x[1]]), [w[0] / n, w[1] / n]) / n
            }
        }
    }

    /// `n` i.i.d. samples, deterministic in `seed`. 1D samples carry `y = 0`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Point2> {
        self.sample_stream(n, seed, 0)
    }

    /// Like [`Density::sample`] on an independent ChaCha stream selected by `tag`.
    pub fn sample_stream(&self, n: usize, seed: u64, tag: u64) -> Vec<Point2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tag);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        match &self.model {
            Model::Uniform1d { a, b } => [a + (b - a) * rng.random::<f64>(), 0.0],
            Model::PiecewiseLinear1d { xs, ys, cdf } => [pl_inverse_cdf(xs, ys, cdf, rng.random::<f64>()), 0.0],
            Model::Polygon { poly, .. } => sample_polygon(poly, rng),
            Model::Gaussian { mean, chol, .. } => {
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                [mean[0] + chol[0][0] * z0, mean[1] + chol[1][0] * z0 + chol[1][1] * z1]
            }
            Model::Cauchy { center, scale } => {
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                let w: f64 = StandardNormal.sample(rng);
                let w = w.abs().max(f64::MIN_POSITIVE);
                [center[0] + scale * z0 / w, center[1] + scale * z1 / w]
            }
            Model::Valley { psi, .. } => {
                // (r, θ) are independent with densities 3r² and ψ/∫ψ.
                let r = rng.random::<f64>().cbrt();
                let theta = loop {
                    let t = -PI + TAU * rng.random::<f64>();
                    if rng.random::<f64>() * psi.max_value() <= psi.eval(t) {
                        break t;
                    }
                };
                [r * theta.cos(), r * theta.sin()]
            }
            Model::Affine { base, inv, .. } => inv.apply(base.draw(rng)),
        }
    }

    /// Mass of the 1D density outside `[a, b]`.
    pub(crate) fn mass_outside(&self, a: f64, b: f64) -> Option<f64> {
        match &self.model {
            Model::Uniform1d { a: lo, b: hi } => {
                let inside = (b.min(*hi) - a.max(*lo)).max(0.0) / (hi - lo);
                Some((1.0 - inside).max(0.0))
            }
            Model::PiecewiseLinear1d { xs, ys, cdf } => {
                Some((pl_cdf(xs, ys, cdf, a) + 1.0 - pl_cdf(xs, ys, cdf, b)).max(0.0))
            }
            _ => None,
        }
    }
}

/// Standard deviation of `ν·Y` and the signed offset `ν·(x - m)`.
fn gaussian_projection(mean: &Point2, cov: &[[f64; 2]; 2], x: &[f64], nu: Point2) -> (f64, f64) {
    let var = nu[0] * (cov[0][0] * nu[0] + cov[0][1] * nu[1]) + nu[1] * (cov[1][0] * nu[0] + cov[1][1] * nu[1]);
    (var.sqrt(), nu[0] * (x[0] - mean[0]) + nu[1] * (x[1] - mean[1]))
}

fn pl_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&k| k <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

fn pl_cdf(xs: &[f64], ys: &[f64], cdf: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return 0.0;
    }
    if x >= xs[xs.len() - 1] {
        return 1.0;
    }
    let i = xs.partition_point(|&k| k <= x).clamp(1, xs.len() - 1);
    let h = x - xs[i - 1];
    let y = pl_eval(xs, ys, x);
    (cdf[i - 1] + 0.5 * h * (ys[i - 1] + y)).clamp(0.0, 1.0)
}

fn pl_inverse_cdf(xs: &[f64], ys: &[f64], cdf: &[f64], u: f64) -> f64 {
    let i = cdf.partition_point(|&c| c <= u).clamp(1, xs.len() - 1);
    let (x0, y0) = (xs[i - 1], ys[i - 1]);
    let slope = (ys[i] - y0) / (xs[i] - x0);
    let target = u - cdf[i - 1];
    // y0 h + slope h²/2 = target
    let h = if slope.abs() < 1e-14 {
        if y0 > 0.0 {
            target / y0
        } else {
            0.0
        }
    } else {
        let disc = (y0 * y0 + 2.0 * slope * target).max(0.0);
        (-y0 + disc.sqrt()) / slope
    };
    (x0 + h).clamp(x0, xs[i])
}

fn sample_polygon<R: Rng + ?Sized>(poly: &ConvexPolygon, rng: &mut R) -> Point2 {
    let v = poly.vertices();
    let total = poly.area();
    let mut pick = rng.random::<f64>() * total;
    let mut tri = v.len() - 2;
    for k in 1..v.len() - 1 {
        let a = 0.5 * cross([v[k][0] - v[0][0], v[k][1] - v[0][1]], [v[k + 1][0] - v[0][0], v[k + 1][1] - v[0][1]]);
        if pick < a {
            tri = k;
            break;
        }
        pick -= a;
    }
    let (a, b, c) = (v[0], v[tri], v[tri + 1]);
    let mut s = rng.random::<f64>();
    let mut t = rng.random::<f64>();
    if s + t > 1.0 {
        s = 1.0 - s;
        t = 1.0 - t;
    }
    [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])]
}

/// `Z(x, ν)` for `ρ = C r ψ(θ)` on the unit disk, by integrating the closed-form
/// radial part against ψ over θ.
fn valley_halfspace_mass(psi: &ValleyPsi, c_norm: f64, x: Point2, nu: Point2) -> f64 {
    let c = dot(x, nu);
    if c >= 1.0 {
        return 0.0;
    }
    if c <= -1.0 {
        return 1.0;
    }
    let phi = nu[1].atan2(nu[0]);
    let acos_c = c.acos();
    let (lo, hi) = if c > 0.0 { (phi - acos_c, phi + acos_c) } else { (phi - PI, phi + PI) };
    let mut breaks: Vec<f64> = vec![phi, phi - acos_c, phi + acos_c, phi - 0.5 * PI, phi + 0.5 * PI];
    for k in psi.kink_angles() {
        // shift each kink into the integration window
        let mut t = k;
        while t < lo {
            t += TAU;
        }
        while t > hi {
            t -= TAU;
        }
        breaks.push(t);
        breaks.push(t + TAU);
        breaks.push(t - TAU);
    }
    let integral = quadrature::piecewise(lo, hi, &mut breaks, |theta| {
        let q = (theta - phi).cos();
        let (a, b) = if c > 0.0 {
            if q <= 0.0 {
                return 0.0;
            }
            ((c / q).min(1.0), 1.0)
        } else if q >= 0.0 {
            (0.0, 1.0)
        } else {
            (0.0, (c / q).min(1.0))
        };
        psi.eval(theta) * (b * b * b - a * a * a)
    });
    c_norm / 3.0 * integral
}

/// Line integral of `C r ψ(θ)` along `{x + t ν⊥}` inside the unit disk.
fn valley_slice(psi: &ValleyPsi, c_norm: f64, x: Point2, nu: Point2) -> f64 {
    let c = dot(x, nu);
    if c.abs() >= 1.0 {
        return 0.0;
    }
    let tau = [-nu[1], nu[0]];
    let mid = -dot(x, tau);
    let half = (1.0 - c * c).sqrt();
    let (t0, t1) = (mid - half, mid + half);
    let mut breaks = vec![mid];
    for k in psi.kink_angles() {
        let e = [k.cos(), k.sin()];
        let den = cross(e, tau);
        if den.abs() < 1e-300 {
            continue;
        }
        let t = -cross(e, x) / den;
        let p = [x[0] + t * tau[0], x[1] + t * tau[1]];
        if dot(e, p) > 0.0 {
            breaks.push(t);
        }
    }
    let integral = quadrature::piecewise(t0, t1, &mut breaks, |t| {
        let p = [x[0] + t * tau[0], x[1] + t * tau[1]];
        p[0].hypot(p[1]) * psi.eval(p[1].atan2(p[0]))
    });
    c_norm * integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn dir(theta: f64) -> Direction {
        Direction::from_angle(theta)
    }

    #[test]
    fn eval_examples() {
        let u = Density::uniform_1d(0.0, 1.0).unwrap();
        assert_eq!(u.eval(&[0.5]).unwrap(), 1.0);
        let sq = Density::unit_square();
        assert_eq!(sq.eval(&[2.0, 2.0]).unwrap(), 0.0);
        let g = Density::standard_gaussian();
        assert!((g.eval(&[0.0, 0.0]).unwrap() - 1.0 / TAU).abs() < 1e-15);
        assert!(matches!(sq.eval(&[0.5]), Err(DepthError::DimensionMismatch { .. })));
    }

    #[test]
    fn halfspace_examples() {
        let sq = Density::unit_square();
        assert!((sq.halfspace_mass(&[0.5, 0.5], &dir(0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((sq.halfspace_mass(&[0.25, 0.25], &dir(0.0)).unwrap() - 0.75).abs() < 1e-15);
        let g = Density::standard_gaussian();
        // Φ(-1)
        assert!((g.halfspace_mass(&[1.0, 0.0], &dir(0.0)).unwrap() - 0.158_655_253_931_457_05).abs() < 1e-10);
    }

    #[test]
    fn slice_examples() {
        let sq = Density::unit_square();
        assert!((sq.slice_integral_analytic(&[0.5, 0.5], &dir(0.5 * PI)).unwrap() - 1.0).abs() < 1e-15);
        let diag = Direction::from_vector(&[1.0, 1.0]).unwrap();
        assert!((sq.slice_integral_analytic(&[0.5, 0.5], &diag).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let g = Density::standard_gaussian();
        for k in 0..8 {
            let v = g.slice_integral_analytic(&[0.0, 0.0], &dir(k as f64 * 0.7)).unwrap();
            assert!((v - 1.0 / TAU.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn complementary_halfspaces_sum_to_one() {
        let dens = [
            Density::unit_square(),
            Density::standard_gaussian(),
            Density::cauchy([0.3, -0.2], 1.5).unwrap(),
            Density::valley(0.05).unwrap(),
            Density::gaussian([1.0, 0.0], [[2.0, 0.5], [0.5, 1.0]]).unwrap(),
        ];
        for d in &dens {
            for k in 0..13 {
                let th = 0.37 + k as f64 * 0.49;
                let x = [0.3 * th.sin(), 0.2 * (2.0 * th).cos() + 0.1];
                let z = d.halfspace_mass(&x, &dir(th)).unwrap() + d.halfspace_mass(&x, &dir(th + PI)).unwrap();
                assert!((z - 1.0).abs() < 1e-10, "{}: {z}", d.kind_name());
            }
        }
    }

    #[test]
    fn valley_halfspace_through_origin_matches_psi_integral() {
        // Z(0, φ) = (C/3) ∫_{φ-π/2}^{φ+π/2} ψ
        let d = Density::valley(0.01).unwrap();
        let Model::Valley { psi, c } = &d.model else { unreachable!() };
        for phi in [0.0, 0.25 * PI, -0.25 * PI, PI, 1.1] {
            let n = 100_000;
            let h = PI / n as f64;
            let s: f64 = (0..n).map(|k| psi.eval(phi - 0.5 * PI + (k as f64 + 0.5) * h)).sum::<f64>() * h;
            let z = d.halfspace_mass(&[0.0, 0.0], &dir(phi)).unwrap();
            assert!((z - c / 3.0 * s).abs() < 1e-8, "phi={phi}: {z} vs {}", c / 3.0 * s);
        }
    }

    #[test]
    fn valley_slice_through_origin_vertical() {
        // line x = 0 crosses only the valley floor: ∫ C r ε dr over two unit radii = C ε
        let d = Density::valley(0.01).unwrap();
        let c = d.valley_constant().unwrap();
        let v = d.slice_integral_analytic(&[0.0, 0.0], &dir(0.0)).unwrap();
        assert!((v - c * 0.01).abs() < 1e-14);
        // along the diagonal line the profile is 1 on both rays
        let v = d.slice_integral_analytic(&[0.0, 0.0], &dir(0.75 * PI)).unwrap();
        assert!((v - c).abs() < 1e-12);
    }

    #[test]
    fn valley_mass_normalized() {
        let d = Density::valley(0.01).unwrap();
        // integrate ρ on a fine polar grid
        let (nr, nt) = (400, 2000);
        let mut s = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let t = (j as f64 + 0.5) * TAU / nt as f64;
                s += d.eval(&[r * t.cos(), r * t.sin()]).unwrap() * r;
            }
        }
        s *= TAU / (nr * nt) as f64;
        assert!((s - 1.0).abs() < 1e-4, "{s}");
    }

    #[test]
    fn affine_of_square_is_parallelogram() {
        let map = AffineMap { matrix: [[1.0, 0.5], [0.0, 1.0]], shift: [0.0, 0.0] };
        let spec = DensitySpec::Affine { base: Box::new(Density::unit_square().spec().clone()), map };
        let d = Density::new(spec).unwrap();
        let inv = map.inverse().unwrap();
        let verts: Vec<Point2> = ConvexPolygon::unit_square().vertices().iter().map(|&v| inv.apply(v)).collect();
        let p = Density::polygon(verts).unwrap();
        for k in 0..10 {
            let th = 0.3 + 0.61 * k as f64;
            let x = [0.2 + 0.05 * k as f64 - 0.3, 0.1 + 0.07 * k as f64];
            let a = d.halfspace_mass(&x, &dir(th)).unwrap();
            let b = p.halfspace_mass(&x, &dir(th)).unwrap();
            assert!((a - b).abs() < 1e-12);
            let a = d.slice_integral_analytic(&x, &dir(th)).unwrap();
            let b = p.slice_integral_analytic(&x, &dir(th)).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let d = Density::valley(0.02).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: Density = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
        let bad = r#"{"kind":"uniform_convex_polygon","vertices":[[0,0],[0,1],[1,1]]}"#;
        assert!(serde_json::from_str::<Density>(bad).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let u = Density::uniform_1d(0.0, 1.0).unwrap();
        let s = u.sample(3, 7);
        assert_eq!(s, u.sample(3, 7));
        assert!(s.iter().all(|p| (0.0..=1.0).contains(&p[0])));
        let tri = Density::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(tri.sample(1000, 3).iter().all(|p| p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0 + 1e-12));
        assert_ne!(tri.sample_stream(4, 3, 1), tri.sample_stream(4, 3, 2));
    }

    #[test]
    fn piecewise_linear_ramp() {
        let d = Density::new(DensitySpec::PiecewiseLinear1d { knots: vec![[0.0, 0.0], [1.0, 2.0]] }).unwrap();
        assert!((d.eval(&[0.5]).unwrap() - 1.0).abs() < 1e-15);
        let up = Direction::along_1d(1.0);
        // Z(x, +1) = 1 - x²
        assert!((d.halfspace_mass(&[FRAC_1_SQRT_2], &up).unwrap() - 0.5).abs() < 1e-14);
        let xs = d.sample(20_000, 5);
        let mean = xs.iter().map(|p| p[0]).sum::<f64>() / xs.len() as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.01, "{mean}");
    }
}
