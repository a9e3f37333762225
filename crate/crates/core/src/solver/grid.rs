use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{DepthError, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `u = 0` on and outside the boundary of the support's convex hull.
    SupportHull,
    /// Exact depth imposed on the outer ring of grid nodes.
    TruncatedBox,
}

/// Rectilinear grid with square cells. A grid with `ny == 1` is a 1D grid
/// along x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub boundary: BoundaryKind,
}

/// Nodes whose hull margin is at most this are treated as on the boundary.
pub(crate) const HULL_EPS: f64 = 1e-12;

impl GridSpec {
    pub fn new(origin: Point2, spacing: f64, nx: usize, ny: usize, boundary: BoundaryKind) -> Result<Self> {
        let g = GridSpec { origin, spacing, nx, ny, boundary };
        g.validate()?;
        Ok(g)
    }

    pub fn line(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(DepthError::InvalidConfig(format!("need at least 3 nodes, got {n}")));
        }
        if !(a < b) {
            return Err(DepthError::InvalidConfig(format!("empty interval [{a}, {b}]")));
        }
        Ok(GridSpec { origin: [a, 0.0], spacing: (b - a) / (n - 1) as f64, nx: n, ny: 1, boundary: BoundaryKind::SupportHull })
    }

    /// Box `[lo, hi]` with spacing `dx`; `hi` is rounded up to a whole number of cells.
    pub fn covering_box(lo: Point2, hi: Point2, dx: f64, boundary: BoundaryKind) -> Result<Self> {
        if !(dx > 0.0) || !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(DepthError::InvalidConfig("box must be non-empty with positive spacing".into()));
        }
        let nx = ((hi[0] - lo[0]) / dx - 1e-9).ceil() as usize + 1;
        let ny = ((hi[1] - lo[1]) / dx - 1e-9).ceil() as usize + 1;
        Self::new(lo, dx, nx, ny, boundary)
    }

    /// Grid around the support hull of a bounded density, with `pad` extra
    /// cells on every side. The origin sits an integer number of cells below
    /// the hull's bounding box so that axis-aligned edges land on nodes.
    pub fn around_support(d: &Density, dx: f64, pad: usize) -> Result<Self> {
        let (lo, hi) = d
            .bounding_box()
            .ok_or_else(|| DepthError::InvalidConfig("density has unbounded support; use a truncation box".into()))?;
        let p = pad.max(1) as f64 * dx;
        let g = Self::covering_box([lo[0] - p, lo[1] - p], [hi[0] + p, hi[1] + p], dx, BoundaryKind::SupportHull)?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(DepthError::InvalidConfig(format!("spacing must be positive, got {}", self.spacing)));
        }
        if self.nx < 3 || (self.ny != 1 && self.ny < 3) {
            return Err(DepthError::InvalidConfig(format!(
                "need at least 3 nodes per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }

    pub fn node_at(&self, k: usize) -> Point2 {
        let (i, j) = self.coords(k);
        self.node(i, j)
    }

    pub fn upper(&self) -> Point2 {
        self.node(self.nx - 1, self.ny - 1)
    }

    pub fn is_edge(&self, k: usize) -> bool {
        let (i, j) = self.coords(k);
        i == 0 || i + 1 == self.nx || (!self.is_1d() && (j == 0 || j + 1 == self.ny))
    }

    pub fn points(&self) -> Vec<Point2> {
        (0..self.len()).map(|k| self.node_at(k)).collect()
    }

    /// Diagonal length of the grid extent.
    pub fn diameter(&self) -> f64 {
        let u = self.upper();
        (u[0] - self.origin[0]).hypot(u[1] - self.origin[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Boundary,
    Fixed,
    Tentative,
}

impl NodeState {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeState::Boundary => "boundary",
            NodeState::Fixed => "fixed",
            NodeState::Tentative => "tentative",
        }
    }
}

/// Node values and states on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub states: Vec<NodeState>,
}

impl GridField {
    pub fn new(spec: GridSpec) -> Self {
        GridField { spec, values: vec![0.0; spec.len()], states: vec![NodeState::Tentative; spec.len()] }
    }

    /// A field with the given values; edge nodes are marked boundary, the rest fixed.
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(DepthError::ShapeMismatch(format!("{} values for {} nodes", values.len(), spec.len())));
        }
        let states = (0..spec.len())
            .map(|k| if spec.is_edge(k) { NodeState::Boundary } else { NodeState::Fixed })
            .collect();
        Ok(GridField { spec, values, states })
    }

    /// Evaluates `f` at every node; states as in [`GridField::from_values`].
    pub fn from_fn<F: Fn(Point2) -> f64>(spec: GridSpec, f: F) -> Self {
        let values = (0..spec.len()).map(|k| f(spec.node_at(k))).collect();
        Self::from_values(spec, values).expect("length matches by construction")
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn is_interior(&self, k: usize) -> bool {
        self.states[k] != NodeState::Boundary
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Bilinear interpolation at `p`; `None` outside the grid.
    pub fn interpolate(&self, p: Point2) -> Option<f64> {
        let s = &self.spec;
        let fx = (p[0] - s.origin[0]) / s.spacing;
        let fy = if s.is_1d() { 0.0 } else { (p[1] - s.origin[1]) / s.spacing };
        let eps = 1e-9;
        if fx < -eps || fx > (s.nx - 1) as f64 + eps || fy < -eps || fy > (s.ny - 1) as f64 + eps {
            return None;
        }
        let fx = fx.clamp(0.0, (s.nx - 1) as f64);
        let fy = fy.clamp(0.0, (s.ny - 1) as f64);
        let i = (fx.floor() as usize).min(s.nx.saturating_sub(2));
        let tx = fx - i as f64;
        if s.is_1d() {
            return Some(self.get(i, 0) * (1.0 - tx) + self.get(i + 1, 0) * tx);
        }
        let j = (fy.floor() as usize).min(s.ny - 2);
        let ty = fy - j as f64;
        Some(
            self.get(i, j) * (1.0 - tx) * (1.0 - ty)
                + self.get(i + 1, j) * tx * (1.0 - ty)
                + self.get(i, j + 1) * (1.0 - tx) * ty
                + self.get(i + 1, j + 1) * tx * ty,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_hits_edges() {
        let d = Density::unit_square();
        let g = GridSpec::around_support(&d, 1.0 / 128.0, 2).unwrap();
        assert_eq!(g.nx, 133);
        assert_eq!(g.node(2, 2), [0.0, 0.0]);
        assert_eq!(g.node(130, 130), [1.0, 1.0]);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(GridSpec::new([0.0, 0.0], 0.1, 2, 5, BoundaryKind::SupportHull).is_err());
        assert!(GridSpec::new([0.0, 0.0], 0.0, 5, 5, BoundaryKind::SupportHull).is_err());
        assert!(GridSpec::line(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn bilinear_is_exact_for_bilinear_functions() {
        let g = GridSpec::new([-1.0, 0.0], 0.25, 9, 5, BoundaryKind::SupportHull).unwrap();
        let f = GridField::from_fn(g, |p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]);
        let p = [0.3, 0.71];
        assert!((f.interpolate(p).unwrap() - (1.0 + 0.6 - 0.71 + 0.5 * 0.3 * 0.71)).abs() < 1e-12);
        assert!(f.interpolate([5.0, 0.0]).is_none());
    }
}
