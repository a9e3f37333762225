use crate::density::{Density, DensitySpec};
use crate::error::{DepthError, Result};
use crate::geometry::AffineMap;

use super::grid::GridSpec;
use super::{solve_2d, SolveReport, SolverConfig};

/// The density `ρ̃(x̃) = ρ(L x̃)·|det A|` of `L⁻¹(X)` for `X ~ ρ`.
pub fn pushforward(d: &Density, map: &AffineMap) -> Result<Density> {
    if d.dim() != 2 {
        return Err(DepthError::DimensionMismatch { expected: 2, got: d.dim() });
    }
    map.inverse()?;
    Density::new(DensitySpec::Affine { base: Box::new(d.spec().clone()), map: *map })
}

/// Solves the depth equation for [`pushforward`]`(d, map)` on `grid`, which
/// must cover the transformed support. The identity map solves `d` itself.
pub fn affine_transform_solve(d: &Density, map: &AffineMap, grid: &GridSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    if map.is_identity() {
        return solve_2d(d, grid, cfg);
    }
    let pushed = pushforward(d, map)?;
    solve_2d(&pushed, grid, cfg)
}
