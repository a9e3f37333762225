//! Marching squares on a [`GridField`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};
use crate::geometry::{convex_hull, signed_area, Point2};
use crate::solver::GridField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point2>,
    /// The last point connects back to the first; it is not repeated.
    pub closed: bool,
}

impl Polyline {
    /// Absolute shoelace area; zero for open polylines.
    pub fn area(&self) -> f64 {
        if self.closed {
            signed_area(&self.points).abs()
        } else {
            0.0
        }
    }

    pub fn hull_area(&self) -> f64 {
        signed_area(&convex_hull(&self.points)).abs()
    }

    /// `(min, max)` distance of the vertices from `center`.
    pub fn radii(&self, center: Point2) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            let r = (p[0] - center[0]).hypot(p[1] - center[1]);
            (lo.min(r), hi.max(r))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelContours {
    pub level: f64,
    pub polylines: Vec<Polyline>,
}

/// Contours at several levels. Levels outside the field range are listed in
/// `empty_levels` instead of failing the whole extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub levels: Vec<LevelContours>,
    pub empty_levels: Vec<f64>,
}

/// Cell edges: horizontal `(i, j)–(i+1, j)` and vertical `(i, j)–(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn crossing(field: &GridField, e: Edge, level: f64) -> Point2 {
    let s = &field.spec;
    let ((i0, j0), (i1, j1)) = match e {
        Edge::H(i, j) => ((i, j), (i + 1, j)),
        Edge::V(i, j) => ((i, j), (i, j + 1)),
    };
    let (a, b) = (field.get(i0, j0), field.get(i1, j1));
    let t = if a == b { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
    let p0 = s.node(i0, j0);
    let p1 = s.node(i1, j1);
    [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])]
}

/// Polylines of `{u = level}` with linear interpolation along cell edges.
/// Nodes with `u ≥ level` count as inside; saddle cells are split by the
/// cell-center average.
pub fn contour_level(field: &GridField, level: f64) -> Result<Vec<Polyline>> {
    let s = field.spec;
    if s.is_1d() {
        return Err(DepthError::ShapeMismatch("contours need a 2D field".into()));
    }
    let (lo, hi) = field.min_max();
    if !level.is_finite() || level < lo || level > hi {
        return Err(DepthError::EmptyLevel(level));
    }
    let mut segs: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..s.ny - 1 {
        for i in 0..s.nx - 1 {
            let v = [field.get(i, j), field.get(i + 1, j), field.get(i + 1, j + 1), field.get(i, j + 1)];
            let code = v.iter().enumerate().fold(0u8, |c, (b, &x)| c | (((x >= level) as u8) << b));
            // bottom, right, top, left
            let (b, r, t, l) = (Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j));
            match code {
                0 | 15 => {}
                1 | 14 => segs.push((l, b)),
                2 | 13 => segs.push((b, r)),
                3 | 12 => segs.push((l, r)),
                4 | 11 => segs.push((r, t)),
                6 | 9 => segs.push((b, t)),
                7 | 8 => segs.push((l, t)),
                5 | 10 => {
                    let center_in = (v.iter().sum::<f64>() / 4.0 >= level) as u8;
                    // corners 0 and 2 inside for 5
                    if (code == 5) == (center_in == 1) {
                        segs.push((l, t));
                        segs.push((b, r));
                    } else {
                        segs.push((l, b));
                        segs.push((r, t));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(chain(field, level, &segs))
}

fn chain(field: &GridField, level: f64, segs: &[(Edge, Edge)]) -> Vec<Polyline> {
    let mut adj: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segs.iter().enumerate() {
        adj.entry(*a).or_default().push(k);
        adj.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    let walk = |start: Edge, used: &mut [bool]| -> (Vec<Edge>, bool) {
        let mut path = vec![start];
        let mut at = start;
        loop {
            let next = adj[&at].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segs[k];
            at = if a == at { b } else { a };
            if at == start {
                return (path, true);
            }
            path.push(at);
        }
        (path, false)
    };
    // open chains start at edges touched once, i.e. where the level set leaves the grid
    let ends: Vec<Edge> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    for e in ends {
        if adj[&e].iter().all(|&k| used[k]) {
            continue;
        }
        let (path, closed) = walk(e, &mut used);
        out.push((path, closed));
    }
    let starts: Vec<Edge> = adj.keys().copied().collect();
    for e in starts {
        if adj[&e].iter().all(|&k| used[k]) {
            continue;
        }
        let (path, closed) = walk(e, &mut used);
        out.push((path, closed));
    }
    out.into_iter()
        .map(|(path, closed)| Polyline { points: path.into_iter().map(|e| crossing(field, e, level)).collect(), closed })
        .collect()
}

pub fn extract_contours(field: &GridField, levels: &[f64]) -> Result<ContourSet> {
    let mut set = ContourSet { levels: Vec::new(), empty_levels: Vec::new() };
    for &level in levels {
        match contour_level(field, level) {
            Ok(polylines) => set.levels.push(LevelContours { level, polylines }),
            Err(DepthError::EmptyLevel(l)) => set.empty_levels.push(l),
            Err(e) => return Err(e),
        }
    }
    Ok(set)
}
