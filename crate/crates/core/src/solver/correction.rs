//! Gauss-Seidel sweeps of the monotone Bardi-Osher discretization
//!
//! `Ĥ(u) = ext_{px ∈ I(p⁻x, p⁺x)} ext_{py ∈ I(p⁻y, p⁺y)} H(px, py) = 0`,
//! `H(p) = |p| − f(x, p/|p|)`, where `ext` over `I(a, b)` is the min on
//! `[a, b]` when `a ≤ b` and the max on `[b, a]` otherwise. `Ĥ` is
//! nondecreasing in the node value, so each update is a scalar root find.
//!
//! `f` is taken linear in the line angle between the tabulated rays (exactly
//! what the band estimator does). Inside one wedge `H` has no critical
//! point, so along a segment its extrema sit at the ends, at ray crossings,
//! or at one closed-form stationary point per wedge.
//!
//! Where `{p : |p| ≤ f(x, p/|p|)}` is not convex (near polygon corners) the
//! fast marching field overshoots; started from it, these sweeps only move
//! the nodes whose equation is not yet satisfied.

use std::f64::consts::PI;

use crate::error::{DepthError, Result};
use crate::slice::TABLE_DIRECTIONS;

use super::grid::{GridField, NodeState};
use super::rhs::Rhs;
use super::sweeping::ORDERINGS;
use super::SolverConfig;

const GOLDEN_STEPS: usize = 40;

/// Coordinates `t` in `(lo, hi)` where the segment `{s = fixed, t ∈ [lo, hi]}`
/// (either orientation) meets a ray from the origin at one of `k` tabulated
/// line angles.
fn ray_crossings(k: f64, fixed: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    if fixed == 0.0 || hi <= lo {
        return;
    }
    // atan(t / s) is a tabulated angle exactly when the ray through (s, t)
    // or (t, s) is, since the table is symmetric about π/4
    let (p, q) = ((lo / fixed).atan(), (hi / fixed).atan());
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    let first = (p / PI * k).ceil() as i64;
    let last = (q / PI * k).floor() as i64;
    for m in first..=last {
        let t = fixed * (m as f64 * PI / k).tan();
        if t > lo && t < hi {
            out.push(t);
        }
    }
}

fn pick(min: bool, acc: f64, v: f64) -> f64 {
    if min {
        acc.min(v)
    } else {
        acc.max(v)
    }
}

fn start(min: bool) -> f64 {
    if min {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// `H` at one node, with `f` read from the tabulated rays on demand.
pub(super) struct NodeHamiltonian<F: FnMut(usize) -> f64> {
    ray_f: F,
    /// Number of tabulated line angles `mπ/lines`, a multiple of 4.
    lines: usize,
    kf: f64,
    rays: Vec<f64>,
    /// Stride through the rays for the direction-free value at `p = 0`.
    fmin_stride: usize,
    fmin: f64,
    buf: Vec<f64>,
    xs: Vec<f64>,
    order: Vec<(f64, usize)>,
}

impl<F: FnMut(usize) -> f64> NodeHamiltonian<F> {
    #[cfg(test)]
    pub(super) fn new(ray_f: F, direction_count: usize) -> Self {
        Self::with_rays(ray_f, TABLE_DIRECTIONS, direction_count, Vec::new())
    }

    /// Reuses ray values cached by an earlier visit to the same node; an
    /// empty vector starts a fresh cache.
    pub(super) fn with_rays(ray_f: F, lines: usize, direction_count: usize, mut rays: Vec<f64>) -> Self {
        debug_assert!(lines % 4 == 0);
        if rays.is_empty() {
            rays = vec![f64::NAN; lines];
        }
        let half = (direction_count / 2).max(1);
        let fmin_stride = if lines % half == 0 { lines / half } else { 1 };
        NodeHamiltonian {
            ray_f,
            lines,
            kf: lines as f64,
            rays,
            fmin_stride,
            fmin: f64::NAN,
            buf: Vec::new(),
            xs: Vec::new(),
            order: Vec::new(),
        }
    }

    pub(super) fn into_rays(self) -> Vec<f64> {
        self.rays
    }

    fn ray(&mut self, k: usize) -> f64 {
        let k = k % self.lines;
        if self.rays[k].is_nan() {
            self.rays[k] = (self.ray_f)(k);
        }
        self.rays[k]
    }

    fn fmin(&mut self) -> f64 {
        if self.fmin.is_nan() {
            self.fmin = (0..self.lines).step_by(self.fmin_stride).map(|k| self.ray(k)).fold(f64::INFINITY, f64::min);
        }
        self.fmin
    }

    /// Largest `f` over the lines with a direction in the cone whose allowed
    /// coordinate signs are `(negative, positive)` per axis; the infimum of
    /// `H` near the origin over that cone is its negative.
    fn cone_max(&mut self, xs: (bool, bool), ys: (bool, bool)) -> f64 {
        let ok = |v: f64, (neg, pos): (bool, bool)| v.abs() < 1e-12 || (v < 0.0 && neg) || (v > 0.0 && pos);
        let mut best = f64::NEG_INFINITY;
        for k in 0..self.lines {
            let (c, s) = ((k as f64 * PI / self.kf).cos(), (k as f64 * PI / self.kf).sin());
            if (ok(c, xs) && ok(s, ys)) || (ok(-c, xs) && ok(-s, ys)) {
                best = best.max(self.ray(k));
            }
        }
        best
    }

    /// Line angle of `p ≠ 0` in units of the table step, in `[0, lines)`,
    /// snapped onto a ray when within rounding.
    fn line_angle(&self, px: f64, py: f64) -> f64 {
        let mut a = py.atan2(px);
        if a < 0.0 {
            a += PI;
        }
        let t = a / PI * self.kf;
        let m = t.round();
        if (t - m).abs() < 1e-9 {
            m % self.kf
        } else {
            t
        }
    }

    fn h(&mut self, px: f64, py: f64) -> f64 {
        let r = px.hypot(py);
        if r == 0.0 {
            return -self.fmin();
        }
        let t = self.line_angle(px, py);
        let k = t.floor();
        let w = t - k;
        let f0 = self.ray(k as usize);
        let f = if w > 0.0 { f0 * (1.0 - w) + self.ray(k as usize + 1) * w } else { f0 };
        r - f
    }

    /// Extremum of `H` over `{(fixed, t)}` (vertical) or `{(t, fixed)}`,
    /// `t ∈ [lo, hi]`.
    fn segment_ext(&mut self, vertical: bool, fixed: f64, lo: f64, hi: f64, min: bool) -> f64 {
        let at = |t: f64| if vertical { (fixed, t) } else { (t, fixed) };
        let mut buf = std::mem::take(&mut self.buf);
        buf.clear();
        buf.push(lo);
        if hi > lo {
            buf.push(hi);
        }
        let mut acc = start(min);
        if fixed == 0.0 {
            if lo <= 0.0 && hi >= 0.0 {
                buf.push(0.0);
                if min && hi > lo {
                    // H → −f(axis) as p → 0 along the segment
                    let axis = if vertical { self.lines / 2 } else { 0 };
                    acc = -self.ray(axis);
                }
            }
        } else {
            // walk the wedges in a = atan(t / fixed) (table units); the line
            // angle of the point is a (vertical) or K/2 − a (horizontal)
            let scale = self.kf / PI;
            let (a0, a1) = ((lo / fixed).atan() * scale, (hi / fixed).atan() * scale);
            let (alo, ahi) = if a0 <= a1 { (a0, a1) } else { (a1, a0) };
            let half = (self.lines / 2) as i64;
            let lines = self.lines as i64;
            let line = move |m: i64| (if vertical { m } else { half - m }).rem_euclid(lines) as usize;
            let at_a = |m: f64| fixed * (m / scale).tan();
            for m in (alo.ceil() as i64)..=(ahi.floor() as i64) {
                let t = at_a(m as f64);
                if t > lo && t < hi {
                    let f = self.ray(line(m));
                    acc = pick(min, acc, fixed.hypot(t) - f);
                }
            }
            // one stationary point per wedge: t·r = ±s·fixed with s the
            // slope of f in the line angle
            let sign = if vertical { 1.0 } else { -1.0 };
            let p2 = fixed * fixed;
            for w in ((alo + 1e-9).floor() as i64)..((ahi - 1e-9).ceil() as i64) {
                let k = if vertical { line(w) } else { line(w + 1) };
                let s = (self.ray(k + 1) - self.ray(k)) * scale;
                let y = 2.0 * s * s * p2 / (p2 + (p2 * p2 + 4.0 * s * s * p2).sqrt());
                let t = (sign * s * fixed).signum() * y.sqrt();
                let (e0, e1) = (at_a(w as f64), at_a((w + 1) as f64));
                if t > lo && t < hi && t >= e0.min(e1) && t <= e0.max(e1) {
                    buf.push(t);
                }
            }
        }
        for &t in &buf {
            let (px, py) = at(t);
            acc = pick(min, acc, self.h(px, py));
        }
        self.buf = buf;
        acc
    }

    /// `Ĥ` over the box spanned by `(a, b)` in `px` and `(c, d)` in `py`.
    pub(super) fn hhat(&mut self, (a, b): (f64, f64), (c, d): (f64, f64)) -> f64 {
        let (outer_min, inner_min) = (a <= b, c <= d);
        let (xlo, xhi) = (a.min(b), a.max(b));
        let (ylo, yhi) = (c.min(d), c.max(d));
        if outer_min == inner_min {
            // min (max) over the box; along each ray H grows with |p|, so the
            // extremum lies on an edge or at the origin
            let min = outer_min;
            let mut acc = start(min);
            for px in [xlo, xhi] {
                acc = pick(min, acc, self.segment_ext(true, px, ylo, yhi, min));
            }
            for py in [ylo, yhi] {
                acc = pick(min, acc, self.segment_ext(false, py, xlo, xhi, min));
            }
            if min && xlo <= 0.0 && xhi >= 0.0 && ylo <= 0.0 && yhi >= 0.0 {
                acc = acc.min(self.h(0.0, 0.0)).min(-self.cone_max((xlo < 0.0, xhi > 0.0), (ylo < 0.0, yhi > 0.0)));
            }
            return acc;
        }
        let mut xs = std::mem::take(&mut self.xs);
        xs.clear();
        xs.push(xlo);
        if xhi > xlo {
            xs.push(xhi);
        }
        if xlo < 0.0 && xhi > 0.0 {
            xs.push(0.0);
        }
        ray_crossings(self.kf, ylo, xlo, xhi, &mut xs);
        ray_crossings(self.kf, yhi, xlo, xhi, &mut xs);
        xs.sort_unstable_by(f64::total_cmp);
        xs.dedup();
        let g = |me: &mut Self, px: f64| me.segment_ext(true, px, ylo, yhi, inner_min);
        let better = |x: f64, y: f64| if outer_min { x < y } else { x > y };
        // the inner ext is bounded by its value at the segment ends (above
        // for a min, below for a max); visit samples by that bound and stop
        // once it cannot beat the best exact value
        let mut order = std::mem::take(&mut self.order);
        order.clear();
        for (i, &px) in xs.iter().enumerate() {
            let b = pick(inner_min, self.h(px, ylo), self.h(px, yhi));
            order.push((b, i));
        }
        order.sort_unstable_by(|x, y| if outer_min { x.0.total_cmp(&y.0) } else { y.0.total_cmp(&x.0) }.then(x.1.cmp(&y.1)));
        let mut best = (start(outer_min), 0);
        for (n, &(b, i)) in order.iter().enumerate() {
            if n > 0 && !better(b, best.0) {
                break;
            }
            let v = g(self, xs[i]);
            if n == 0 || better(v, best.0) {
                best = (v, i);
            }
        }
        self.order = order;
        // golden-section refinement between the best sample's neighbors
        let (mut lo, mut hi) = (xs[best.1.saturating_sub(1)], xs[(best.1 + 1).min(xs.len() - 1)]);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut m1, mut m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        let (mut g1, mut g2) = (g(self, m1), g(self, m2));
        let mut acc = pick(outer_min, best.0, pick(outer_min, g1, g2));
        for _ in 0..GOLDEN_STEPS {
            if hi - lo <= 1e-14 * (1.0 + hi.abs()) {
                break;
            }
            if better(g1, g2) {
                hi = m2;
                (m2, g2) = (m1, g1);
                m1 = hi - r * (hi - lo);
                g1 = g(self, m1);
                acc = pick(outer_min, acc, g1);
            } else {
                lo = m1;
                (m1, g1) = (m2, g2);
                m2 = lo + r * (hi - lo);
                g2 = g(self, m2);
                acc = pick(outer_min, acc, g2);
            }
        }
        self.xs = xs;
        acc
    }
}

struct NodeProblem<F: FnMut(usize) -> f64> {
    ham: NodeHamiltonian<F>,
    dx: f64,
    /// West, east, south, north neighbor values.
    nbr: [f64; 4],
}

impl<F: FnMut(usize) -> f64> NodeProblem<F> {
    fn hhat(&mut self, v: f64) -> f64 {
        let [w, e, s, n] = self.nbr;
        let dx = self.dx;
        self.ham.hhat(((v - w) / dx, (e - v) / dx), ((v - s) / dx, (n - v) / dx))
    }

    /// Root of `Ĥ` near `v0`; `None` when `v0` already satisfies it to `tol`.
    fn solve(&mut self, v0: f64, tol: f64) -> Option<f64> {
        let dx = self.dx;
        let g0 = self.hhat(v0);
        // Ĥ grows like |u − v*|/Δ, so |Ĥ|Δ estimates the distance to the root
        if g0.is_nan() || g0.abs() * dx < 0.1 * tol {
            return None;
        }
        let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
        let mut step = (g0.abs() * dx).max(tol);
        let (mut a, mut ga) = (v0, g0);
        let (mut b, mut gb);
        let mut grow = 0;
        loop {
            b = v0 + dir * step;
            gb = self.hhat(b);
            if gb.signum() != g0.signum() || gb == 0.0 {
                break;
            }
            (a, ga) = (b, gb);
            step *= 2.0;
            grow += 1;
            if grow > 80 {
                return None;
            }
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut ga, &mut gb);
        }
        // Illinois regula falsi on [a, b] with ga < 0 < gb
        let mut side = 0i8;
        let mut c = 0.5 * (a + b);
        for _ in 0..100 {
            c = if gb - ga > 0.0 { (a * gb - b * ga) / (gb - ga) } else { 0.5 * (a + b) };
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let gc = self.hhat(c);
            if gc == 0.0 || gc.abs() * dx < 1e-3 * tol || b - a < 1e-3 * tol {
                break;
            }
            if gc < 0.0 {
                (a, ga) = (c, gc);
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                (b, gb) = (c, gc);
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
        }
        Some(c)
    }
}

/// Sweeps until a full pass changes no node by more than `cfg.sweep_tol`.
/// Only nodes next to a changed node are revisited. Returns the pass count.
pub(super) fn run(field: &mut GridField, rhs: &Rhs<'_>, cfg: &SolverConfig) -> Result<usize> {
    let s = field.spec;
    let dx = s.spacing;
    let tol = cfg.sweep_tol;
    let active: Vec<bool> = field.states.iter().map(|st| *st != NodeState::Boundary).collect();
    let mut dirty = active.clone();
    let orderings: Vec<(bool, bool)> =
        if cfg.reverse_sweeps { ORDERINGS.iter().rev().copied().collect() } else { ORDERINGS.to_vec() };
    let lines = TABLE_DIRECTIONS;
    let kf = lines as f64;
    // ray values depend only on the node, so they are kept across passes
    let mut ray_cache: Vec<Vec<f64>> = vec![Vec::new(); s.len()];
    let mut last = f64::INFINITY;
    for pass in 0..cfg.max_sweeps {
        let (ri, rj) = orderings[pass % 4];
        let mut max_change: f64 = 0.0;
        for jj in 1..s.ny - 1 {
            let j = if rj { s.ny - 1 - jj } else { jj };
            for ii in 1..s.nx - 1 {
                let i = if ri { s.nx - 1 - ii } else { ii };
                let k = s.index(i, j);
                if !dirty[k] {
                    continue;
                }
                dirty[k] = false;
                let x = s.node(i, j);
                let u = &field.values;
                let v0 = u[k];
                let ray_f = |m: usize| rhs.eval_angle(x, PI * m as f64 / kf);
                let mut node = NodeProblem {
                    ham: NodeHamiltonian::with_rays(ray_f, lines, cfg.direction_count, std::mem::take(&mut ray_cache[k])),
                    dx,
                    nbr: [u[k - 1], u[k + 1], u[k - s.nx], u[k + s.nx]],
                };
                let res = node.solve(v0, tol);
                ray_cache[k] = node.ham.into_rays();
                let Some(v) = res else { continue };
                let change = (v - v0).abs();
                field.values[k] = v;
                max_change = max_change.max(change);
                if change > 0.01 * tol {
                    for q in [k - 1, k + 1, k - s.nx, k + s.nx] {
                        dirty[q] |= active[q];
                    }
                }
            }
        }
        last = max_change;
        if max_change < tol {
            return Ok(pass + 1);
        }
        if !max_change.is_finite() {
            break;
        }
    }
    Err(DepthError::NoConvergence { iterations: cfg.max_sweeps, max_update: last })
}
