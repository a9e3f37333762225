use crate::density::Density;
use crate::error::{DepthError, Result};

use super::grid::{GridField, GridSpec, NodeState};

/// Viscosity solution of `|u'| = ρ`, `u(a) = u(b) = 0`: `u = min(F, 1 − F)`
/// with `F` the trapezoid-rule CDF on the grid.
pub fn solve_1d(d: &Density, a: f64, b: f64, n: usize) -> Result<GridField> {
    if d.dim() != 1 {
        return Err(DepthError::DimensionMismatch { expected: 1, got: d.dim() });
    }
    let spec = GridSpec::line(a, b, n)?;
    let outside = d.mass_outside(a, b).unwrap_or(0.0);
    if outside > 1e-9 {
        return Err(DepthError::BadSupport { a, b, outside });
    }
    let rho: Vec<f64> = (0..n).map(|i| d.eval(&[spec.node(i, 0)[0]])).collect::<Result<_>>()?;
    let mut field = GridField::new(spec);
    let mut cdf = 0.0;
    for i in 0..n {
        if i > 0 {
            cdf += 0.5 * spec.spacing * (rho[i - 1] + rho[i]);
        }
        field.values[i] = cdf.min(1.0 - cdf).max(0.0);
        field.states[i] = NodeState::Fixed;
    }
    for i in [0, n - 1] {
        field.values[i] = 0.0;
        field.states[i] = NodeState::Boundary;
    }
    Ok(field)
}

/// The sawtooth `u_m` with `m` teeth on `[0, 1]`: it solves `|u'| = 1` away
/// from its corners but is not the viscosity solution for `m ≥ 2`.
pub fn sawtooth(m: usize, x: f64) -> f64 {
    let m = m.max(1) as f64;
    let t = (x * m).rem_euclid(1.0);
    t.min(1.0 - t) / m
}

/// Largest defect of the monotone upwind scheme for `|u'| = ρ` over interior
/// nodes, `max_i (min(u_{i-1}, u_{i+1}) + ρ(x_i) Δ − u_i)`. A discrete
/// viscosity supersolution has defect ≤ 0; a downward corner does not.
pub fn supersolution_defect_1d(d: &Density, field: &GridField) -> Result<f64> {
    if !field.spec.is_1d() {
        return Err(DepthError::ShapeMismatch("expected a 1D grid".into()));
    }
    let s = field.spec;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..s.nx - 1 {
        let rho = d.eval(&[s.node(i, 0)[0]])?;
        let g = field.values[i - 1].min(field.values[i + 1]) + rho * s.spacing;
        worst = worst.max(g - field.values[i]);
    }
    Ok(worst)
}

/// Nodes where [`supersolution_defect_1d`]'s per-node defect exceeds `tol`.
pub fn supersolution_violations_1d(d: &Density, field: &GridField, tol: f64) -> Result<Vec<usize>> {
    let s = field.spec;
    let mut out = Vec::new();
    for i in 1..s.nx - 1 {
        let rho = d.eval(&[s.node(i, 0)[0]])?;
        if field.values[i - 1].min(field.values[i + 1]) + rho * s.spacing - field.values[i] > tol {
            out.push(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensitySpec;

    #[test]
    fn uniform_is_tent() {
        let d = Density::uniform_1d(0.0, 1.0).unwrap();
        let f = solve_1d(&d, 0.0, 1.0, 129).unwrap();
        assert!((f.values[32] - 0.25).abs() < 1e-15);
        assert!((f.values[64] - 0.5).abs() < 1e-15);
        assert!(f.values[1..128].iter().all(|v| *v > 0.0));
    }

    #[test]
    fn not_a_sawtooth() {
        let d = Density::uniform_1d(0.0, 1.0).unwrap();
        let f = solve_1d(&d, 0.0, 1.0, 129).unwrap();
        assert!((f.values[96] - 0.25).abs() < 1e-15);
        assert_eq!(sawtooth(2, 0.75), 0.25);
        assert_eq!(sawtooth(2, 0.5), 0.0);
    }

    #[test]
    fn bad_support() {
        let d = Density::uniform_1d(0.0, 1.0).unwrap();
        assert!(matches!(solve_1d(&d, 0.0, 0.5, 65), Err(DepthError::BadSupport { .. })));
        let g = Density::standard_gaussian();
        assert!(matches!(solve_1d(&g, 0.0, 1.0, 65), Err(DepthError::DimensionMismatch { .. })));
    }

    #[test]
    fn linear_density() {
        let d = Density::new(DensitySpec::PiecewiseLinear1d { knots: vec![[0.0, 0.0], [1.0, 2.0]] }).unwrap();
        let f = solve_1d(&d, 0.0, 1.0, 257).unwrap();
        for i in 0..257 {
            let x = i as f64 / 256.0;
            assert!((f.values[i] - (x * x).min(1.0 - x * x)).abs() < 1e-14);
        }
    }
}
