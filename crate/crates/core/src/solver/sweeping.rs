//! Lax-Friedrichs fast sweeping for `H(x, p) = |p| − f(x, p/|p|) = 0`.
//!
//! The gradient magnitude is the central difference. The direction that
//! selects `f` comes from the one-sided upwind gradient at the updated value,
//! so each node update is a small scalar root find.

use crate::error::{DepthError, Result};

use super::fmm::gradient_direction;
use super::grid::{GridField, NodeState};
use super::rhs::Rhs;
use super::{Diagnostics, SolverConfig};

/// The four alternating Gauss-Seidel orderings as (reverse i, reverse j).
pub(super) const ORDERINGS: [(bool, bool); 4] = [(false, false), (true, false), (true, true), (false, true)];

fn axis_upwind(a: f64, b: f64) -> Option<(f64, f64)> {
    // a lies on the negative side, b on the positive side
    if !a.is_finite() && !b.is_finite() {
        None
    } else if b < a {
        Some((b, -1.0))
    } else {
        Some((a, 1.0))
    }
}

pub(super) fn run(field: &mut GridField, rhs: &Rhs<'_>, cfg: &SolverConfig) -> Result<Diagnostics> {
    let s = field.spec;
    let n = s.len();
    let dx = s.spacing;
    let sigma = cfg.lf_viscosity;
    let mut diag = Diagnostics::default();
    for k in 0..n {
        if field.states[k] != NodeState::Boundary {
            field.values[k] = 0.0;
        }
    }
    let mut fallback = vec![f64::NAN; n];
    let orderings: Vec<(bool, bool)> =
        if cfg.reverse_sweeps { ORDERINGS.iter().rev().copied().collect() } else { ORDERINGS.to_vec() };

    let mut last = f64::INFINITY;
    for pass in 0..cfg.max_sweeps {
        let (ri, rj) = orderings[pass % 4];
        let mut max_update: f64 = 0.0;
        for jj in 1..s.ny - 1 {
            let j = if rj { s.ny - 1 - jj } else { jj };
            for ii in 1..s.nx - 1 {
                let i = if ri { s.nx - 1 - ii } else { ii };
                let k = s.index(i, j);
                if field.states[k] == NodeState::Boundary {
                    continue;
                }
                let u = &field.values;
                let (ue, uw, un, us) = (u[k + 1], u[k - 1], u[k + s.nx], u[k - s.nx]);
                let norm = ((ue - uw) / (2.0 * dx)).hypot((un - us) / (2.0 * dx));
                let avg = 0.25 * (ue + uw + un + us);
                let x = s.node(i, j);
                if fallback[k].is_nan() {
                    fallback[k] = rhs.min_over_directions(&x)?;
                }
                let ux = axis_upwind(uw, ue);
                let uy = axis_upwind(us, un);
                let mut lf = |v: f64, diag: &mut Diagnostics| -> Result<f64> {
                    let f = match gradient_direction(ux, uy, v, dx) {
                        Some(d) => rhs.eval_vec(x, d),
                        None => fallback[k],
                    };
                    if f < cfg.rhs_floor {
                        diag.flag_floor(k);
                    }
                    Ok(avg - dx * (norm - f) / (2.0 * sigma))
                };
                let next = solve_node(field.values[k], &mut lf, &mut diag, cfg)?;
                max_update = max_update.max((next - field.values[k]).abs());
                field.values[k] = next;
            }
        }
        diag.iterations = pass + 1;
        last = max_update;
        if max_update < cfg.sweep_tol {
            diag.max_update_last_pass = max_update;
            for st in field.states.iter_mut() {
                if *st == NodeState::Tentative {
                    *st = NodeState::Fixed;
                }
            }
            return Ok(diag);
        }
        if !max_update.is_finite() {
            break;
        }
    }
    Err(DepthError::NoConvergence { iterations: diag.iterations, max_update: last })
}

/// Root of `v = lf(v)` near `start`: plain iteration, then Illinois regula
/// falsi on a bracket grown from `start`.
fn solve_node(
    start: f64,
    lf: &mut impl FnMut(f64, &mut Diagnostics) -> Result<f64>,
    diag: &mut Diagnostics,
    cfg: &SolverConfig,
) -> Result<f64> {
    let tol = cfg.dir_fixed_point_tol;
    let mut v = start;
    for _ in 0..4 {
        let next = lf(v, diag)?;
        if (next - v).abs() < tol {
            return Ok(next);
        }
        v = next;
    }
    let g = |v: f64, diag: &mut Diagnostics, lf: &mut dyn FnMut(f64, &mut Diagnostics) -> Result<f64>| {
        lf(v, diag).map(|w| w - v)
    };
    // g decreases with slope −1 plus bounded jumps, so it changes sign on
    // any bracket wide enough.
    let gv = g(v, diag, lf)?;
    let mut step = gv.abs().max(tol);
    let (mut a, mut ga, mut b, mut gb);
    if gv > 0.0 {
        (a, ga) = (v, gv);
        loop {
            b = v + step;
            gb = g(b, diag, lf)?;
            if gb <= 0.0 {
                break;
            }
            (a, ga) = (b, gb);
            step *= 2.0;
        }
    } else {
        (b, gb) = (v, gv);
        loop {
            a = v - step;
            ga = g(a, diag, lf)?;
            if ga >= 0.0 {
                break;
            }
            (b, gb) = (a, ga);
            step *= 2.0;
        }
    }
    let mut side = 0i8;
    let mut c = 0.5 * (a + b);
    for _ in 0..200 {
        c = if ga - gb > 0.0 { (a * gb - b * ga) / (gb - ga) } else { 0.5 * (a + b) };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c, diag, lf)?;
        if gc.abs() < tol || b - a < tol {
            return Ok(c);
        }
        if gc > 0.0 {
            (a, ga) = (c, gc);
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            (b, gb) = (c, gc);
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }
    diag.fixed_point_failures += 1;
    Ok(c)
}
