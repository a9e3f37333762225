//! Planar helpers: convex polygons, halfplane clipping, chords, affine maps.

use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};

pub type Point2 = [f64; 2];

#[inline]
pub fn dot(a: Point2, b: Point2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point2, b: Point2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn sub(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Signed shoelace area (positive for counter-clockwise rings).
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += cross(ring[i], ring[(i + 1) % n]);
    }
    0.5 * acc
}

/// Convex hull by the monotone chain, counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(sub(hull[hull.len() - 1], hull[hull.len() - 2]), sub(p, hull[hull.len() - 1])) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// A strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
    area: f64,
}

impl TryFrom<Vec<Point2>> for ConvexPolygon {
    type Error = DepthError;

    fn try_from(v: Vec<Point2>) -> Result<Self> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Point2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(DepthError::Domain(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(DepthError::Domain("polygon vertex is not finite".into()));
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(sub(b, a), sub(c, b)) <= 0.0 {
                return Err(DepthError::Domain(format!(
                    "polygon is not strictly convex and counter-clockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        let area = signed_area(&vertices);
        Ok(ConvexPolygon { vertices, area })
    }

    pub fn unit_square() -> Self {
        Self::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        d
    }

    /// Minimum signed distance from `p` to the edge lines; positive inside.
    pub fn inset_distance(&self, p: Point2) -> f64 {
        let n = self.vertices.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = sub(b, a);
            let len = e[0].hypot(e[1]);
            m = m.min(cross(e, sub(p, a)) / len);
        }
        m
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.inset_distance(p) >= 0.0
    }

    /// Area of the part of the polygon in `{y : normal·y >= offset}`.
    pub fn clipped_area(&self, normal: Point2, offset: f64) -> f64 {
        let n = self.vertices.len();
        // Sutherland-Hodgman against a single halfplane; at most n + 1 vertices survive.
        let mut out: Vec<Point2> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let da = dot(normal, a) - offset;
            let db = dot(normal, b) - offset;
            if da >= 0.0 {
                out.push(a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                let t = da / (da - db);
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        signed_area(&out).max(0.0)
    }

    /// Parameter interval `[t0, t1]` of the line `p + t·dir` inside the polygon.
    pub fn chord(&self, p: Point2, dir: Point2) -> Option<(f64, f64)> {
        let n = self.vertices.len();
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = sub(b, a);
            // inside: cross(e, q - a) >= 0
            let num = cross(e, sub(p, a));
            let den = cross(e, dir);
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    pub fn chord_length(&self, p: Point2, dir: Point2) -> f64 {
        let norm = dir[0].hypot(dir[1]);
        match self.chord(p, dir) {
            Some((t0, t1)) => (t1 - t0).max(0.0) * norm,
            None => 0.0,
        }
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let mut c = [0.0, 0.0];
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = cross(a, b);
            c[0] += (a[0] + b[0]) * w;
            c[1] += (a[1] + b[1]) * w;
        }
        [c[0] / (6.0 * self.area), c[1] / (6.0 * self.area)]
    }
}

/// `x ↦ A x + b` on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// Row-major 2×2 matrix.
    pub matrix: [[f64; 2]; 2],
    pub shift: Point2,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { matrix: [[1.0, 0.0], [0.0, 1.0]], shift: [0.0, 0.0] }
    }

    pub fn det(&self) -> f64 {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn apply(&self, x: Point2) -> Point2 {
        let m = self.matrix;
        [
            m[0][0] * x[0] + m[0][1] * x[1] + self.shift[0],
            m[1][0] * x[0] + m[1][1] * x[1] + self.shift[1],
        ]
    }

    pub fn apply_linear(&self, x: Point2) -> Point2 {
        let m = self.matrix;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    /// `A^T v`.
    pub fn apply_transpose(&self, v: Point2) -> Point2 {
        let m = self.matrix;
        [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.det();
        if det.abs() < 1e-14 || !det.is_finite() {
            return Err(DepthError::SingularTransform(det));
        }
        let m = self.matrix;
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let s = self.shift;
        let shift = [-(inv[0][0] * s[0] + inv[0][1] * s[1]), -(inv[1][0] * s[0] + inv[1][1] * s[1])];
        Ok(AffineMap { matrix: inv, shift })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_clockwise_and_degenerate() {
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [[0.0, 0.0], [0.5, 0.5], [1.0, 0.0], [0.5, 0.0], [1.0, 1.0], [0.0, 1.0], [0.2, 0.7]];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(signed_area(&h), 1.0);
    }

    #[test]
    fn square_clipping() {
        let sq = ConvexPolygon::unit_square();
        assert!((sq.area() - 1.0).abs() < 1e-15);
        assert!((sq.clipped_area([1.0, 0.0], 0.25) - 0.75).abs() < 1e-15);
        assert!((sq.clipped_area([-1.0, 0.0], -0.25) - 0.25).abs() < 1e-15);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sq.clipped_area([d, d], d) - 0.5).abs() < 1e-15);
        assert_eq!(sq.clipped_area([1.0, 0.0], 2.0), 0.0);
    }

    #[test]
    fn square_chords() {
        let sq = ConvexPolygon::unit_square();
        assert!((sq.chord_length([0.5, 0.5], [1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((sq.chord_length([0.5, 0.5], [1.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(sq.chord_length([2.0, 2.0], [1.0, 0.0]), 0.0);
        let (t0, t1) = sq.chord([0.25, 0.5], [0.0, 1.0]).unwrap();
        assert!((t0 + 0.5).abs() < 1e-15 && (t1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn affine_inverse_round_trip() {
        let m = AffineMap { matrix: [[1.0, 0.5], [0.2, 2.0]], shift: [0.3, -1.0] };
        let inv = m.inverse().unwrap();
        let p = [0.7, -0.4];
        let q = inv.apply(m.apply(p));
        assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
        let sing = AffineMap { matrix: [[1.0, 2.0], [2.0, 4.0]], shift: [0.0, 0.0] };
        assert!(matches!(sing.inverse(), Err(DepthError::SingularTransform(_))));
    }
}
