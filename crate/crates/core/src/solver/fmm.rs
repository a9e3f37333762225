//! Fast marching with a per-node fixed point between the node value and the
//! gradient direction that selects the right-hand side.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::Result;

use super::godunov::upwind_update;
use super::grid::{GridField, NodeState};
use super::rhs::Rhs;
use super::{Diagnostics, SolverConfig};

struct Marcher<'a, 'b> {
    field: &'b mut GridField,
    rhs: &'b Rhs<'a>,
    cfg: &'b SolverConfig,
    known: Vec<bool>,
    dirs: Vec<Option<[f64; 2]>>,
    fallback: Vec<f64>,
    /// Final fixed-point change of each node; zero when it converged.
    last_change: Vec<f64>,
    diag: Diagnostics,
}

/// Unit vector of the one-sided upwind gradient at trial value `u`.
pub(super) fn gradient_direction(ux: Option<(f64, f64)>, uy: Option<(f64, f64)>, u: f64, dx: f64) -> Option<[f64; 2]> {
    let px = ux.map_or(0.0, |(v, sg)| sg * (u - v).max(0.0) / dx);
    let py = uy.map_or(0.0, |(v, sg)| sg * (u - v).max(0.0) / dx);
    let norm = px.hypot(py);
    (norm > 0.0).then(|| [px / norm, py / norm])
}

struct Update {
    u: f64,
    dir: Option<[f64; 2]>,
    last_change: f64,
    converged: bool,
}

pub(super) fn run(field: &mut GridField, rhs: &Rhs<'_>, cfg: &SolverConfig) -> Result<Diagnostics> {
    let n = field.spec.len();
    let known: Vec<bool> = field.states.iter().map(|s| *s == NodeState::Boundary).collect();
    for (v, &k) in field.values.iter_mut().zip(&known) {
        if !k {
            *v = f64::INFINITY;
        }
    }
    let mut m = Marcher {
        field,
        rhs,
        cfg,
        known,
        dirs: vec![None; n],
        fallback: vec![f64::NAN; n],
        last_change: vec![0.0; n],
        diag: Diagnostics::default(),
    };
    m.march()?;
    Ok(m.diag)
}

impl Marcher<'_, '_> {
    fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> {
        let s = self.field.spec;
        let (i, j) = s.coords(k);
        let mut out = [usize::MAX; 4];
        if i > 0 {
            out[0] = k - 1;
        }
        if i + 1 < s.nx {
            out[1] = k + 1;
        }
        if j > 0 {
            out[2] = k - s.nx;
        }
        if j + 1 < s.ny {
            out[3] = k + s.nx;
        }
        out.into_iter().filter(|&q| q != usize::MAX)
    }

    /// Smaller accepted neighbor value along one axis, with the sign of the
    /// one-sided derivative it induces.
    fn axis_upwind(&self, a: Option<usize>, b: Option<usize>) -> Option<(f64, f64)> {
        let pick = |q: Option<usize>, sign: f64| q.filter(|&q| self.known[q]).map(|q| (self.field.values[q], sign));
        match (pick(a, 1.0), pick(b, -1.0)) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
            (x, y) => x.or(y),
        }
    }

    fn fallback_rhs(&mut self, k: usize, x: &[f64]) -> Result<f64> {
        if self.fallback[k].is_nan() {
            self.fallback[k] = self.rhs.min_over_directions(x)?;
        }
        Ok(self.fallback[k])
    }

    fn rhs(&mut self, k: usize, x: &[f64], dir: Option<[f64; 2]>) -> Result<f64> {
        let f = match dir {
            Some(v) => self.rhs.eval_vec([x[0], x[1]], v),
            None => self.fallback_rhs(k, x)?,
        };
        if f < self.cfg.rhs_floor {
            self.diag.flag_floor(k);
        }
        Ok(f)
    }

    /// Axial mean of the accepted neighbors' gradient directions (ν and −ν
    /// select the same line, so angles are averaged doubled).
    fn neighbor_direction(&self, k: usize) -> Option<[f64; 2]> {
        let (mut c, mut s) = (0.0, 0.0);
        for q in self.neighbors(k) {
            if let (true, Some(v)) = (self.known[q], self.dirs[q]) {
                c += v[0] * v[0] - v[1] * v[1];
                s += 2.0 * v[0] * v[1];
            }
        }
        let r = c.hypot(s);
        if r < 1e-12 {
            return None;
        }
        let half = 0.5 * s.atan2(c);
        Some([half.cos(), half.sin()])
    }

    fn compute(&mut self, k: usize) -> Result<Update> {
        let s = self.field.spec;
        let (i, j) = s.coords(k);
        let x = s.node(i, j);
        let dx = s.spacing;
        let west = (i > 0).then(|| k - 1);
        let east = (i + 1 < s.nx).then(|| k + 1);
        let south = (j > 0).then(|| k - s.nx);
        let north = (j + 1 < s.ny).then(|| k + s.nx);
        let ux = self.axis_upwind(west, east);
        let uy = self.axis_upwind(south, north);

        let ua = ux.map(|v| v.0);
        let ub = uy.map(|v| v.0);
        let mut dir = self.neighbor_direction(k);
        let f = self.rhs(k, &x, dir)?;
        let mut u = upwind_update(ua, ub, dx, f)?;
        let mut last_change = f64::INFINITY;
        let mut fixed = None;
        for _ in 0..self.cfg.dir_fixed_point_max_iters {
            dir = gradient_direction(ux, uy, u, dx);
            let f = self.rhs(k, &x, dir)?;
            let next = upwind_update(ua, ub, dx, f)?;
            last_change = (next - u).abs();
            u = next;
            if last_change < self.cfg.dir_fixed_point_tol {
                fixed = Some(Update { u, dir, last_change, converged: true });
                break;
            }
        }
        if let Some(up) = fixed {
            return Ok(up);
        }
        // The plain iteration cycles when the slice varies quickly with the
        // angle; solve g(v) = G(v) − v = 0 by safeguarded regula falsi instead.
        let g = |v: f64, m: &mut Self| -> Result<(f64, Option<[f64; 2]>)> {
            let dir = gradient_direction(ux, uy, v, dx);
            let f = m.rhs(k, &x, dir)?;
            Ok((upwind_update(ua, ub, dx, f)? - v, dir))
        };
        let lo0 = ua.into_iter().chain(ub).fold(f64::INFINITY, f64::min);
        let (mut a, mut ga) = (lo0, g(lo0, self)?.0);
        let mut b = u.max(lo0) + dx * f.max(1e-300);
        let mut gb = g(b, self)?.0;
        let mut grow = 0;
        while gb > 0.0 && grow < 60 {
            a = b;
            ga = gb;
            b = lo0 + 2.0 * (b - lo0);
            gb = g(b, self)?.0;
            grow += 1;
        }
        if ga < 0.0 || gb > 0.0 {
            return Ok(Update { u, dir, last_change, converged: false });
        }
        let mut side = 0i8;
        for _ in 0..200 {
            let c = if ga - gb > 0.0 { (a * gb - b * ga) / (gb - ga) } else { 0.5 * (a + b) };
            let c = if c > a && c < b { c } else { 0.5 * (a + b) };
            let (gc, dc) = g(c, self)?;
            u = c;
            dir = dc;
            if gc.abs() < self.cfg.dir_fixed_point_tol || b - a < self.cfg.dir_fixed_point_tol {
                return Ok(Update { u, dir, last_change: gc.abs(), converged: true });
            }
            if gc > 0.0 {
                a = c;
                ga = gc;
                if side == 1 {
                    gb *= 0.5;
                }
                side = 1;
            } else {
                b = c;
                gb = gc;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            }
        }
        Ok(Update { u, dir, last_change, converged: false })
    }

    fn march(&mut self) -> Result<()> {
        let n = self.field.spec.len();
        let mut heap = BinaryHeap::new();
        let mut in_fail = vec![false; n];
        for k in 0..n {
            if !self.known[k] && self.neighbors(k).any(|q| self.known[q]) {
                let up = self.compute(k)?;
                self.store(k, &up, f64::NEG_INFINITY, &mut in_fail);
                heap.push(Reverse((OrderedFloat(self.field.values[k]), k)));
            }
        }
        let mut front = f64::NEG_INFINITY;
        while let Some(Reverse((OrderedFloat(key), k))) = heap.pop() {
            if self.known[k] || key != self.field.values[k] {
                continue;
            }
            debug_assert!(key >= front);
            front = key;
            self.known[k] = true;
            self.field.states[k] = NodeState::Fixed;
            self.diag.iterations += 1;
            let nbrs: Vec<usize> = self.neighbors(k).filter(|&q| !self.known[q]).collect();
            for q in nbrs {
                let up = self.compute(q)?;
                self.store(q, &up, front, &mut in_fail);
                heap.push(Reverse((OrderedFloat(self.field.values[q]), q)));
            }
        }
        self.diag.fixed_point_failures = in_fail.iter().filter(|b| **b).count();
        self.diag.max_update_last_pass = self.last_change.iter().copied().fold(0.0, f64::max);
        for k in 0..n {
            if self.field.states[k] == NodeState::Tentative {
                // unreachable from the boundary
                self.field.values[k] = 0.0;
                self.field.states[k] = NodeState::Fixed;
            }
        }
        Ok(())
    }

    fn store(&mut self, k: usize, up: &Update, front: f64, in_fail: &mut [bool]) {
        let mut u = up.u;
        if u < front {
            u = front;
            self.diag.monotonicity_clamps += 1;
        }
        self.field.values[k] = u;
        self.dirs[k] = up.dir;
        in_fail[k] = !up.converged;
        self.last_change[k] = if up.converged { 0.0 } else { up.last_change };
    }
}
