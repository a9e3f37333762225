//! Error metrics against a reference field, contours, convergence tables and
//! the file formats that carry them.

mod contour;
mod io;

use serde::{Deserialize, Serialize};

use crate::density::{Density, DensitySpec, Support};
use crate::error::{DepthError, Result};
use crate::oracle::DirectionSearchConfig;
use crate::solver::{self, GridField, GridSpec, SolverConfig};

pub use contour::{contour_level, extract_contours, ContourSet, LevelContours, Polyline};
pub use io::{
    read_json, write_contours_json, write_field_csv, write_json, write_oracle_csv, FieldSidecar, OracleRow,
    SolveSummary,
};

/// `git describe` of the source tree this crate was built from.
pub const GIT_DESCRIBE: &str = env!("DEPTH_HJB_GIT_DESCRIBE");

/// Everything needed to regenerate an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub git_describe: String,
    pub command: String,
    pub argv: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub figure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub density: Option<DensitySpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solver: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub search: Option<DirectionSearchConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub levels: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub spacings: Vec<f64>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, argv: Vec<String>) -> Self {
        Manifest {
            tool: "depth-hjb".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            git_describe: GIT_DESCRIBE.into(),
            command: command.into(),
            argv,
            seeds: Vec::new(),
            figure: None,
            density: None,
            grid: None,
            solver: None,
            search: None,
            levels: Vec::new(),
            spacings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub l_inf: f64,
    pub l1_mean: f64,
    /// `max (u − t)`; positive where the computed field overshoots.
    pub signed_max: f64,
    pub interior_nodes: usize,
    /// `u − t` at every node, with the states of `u`.
    #[serde(skip)]
    pub residuals: Option<GridField>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub manifest: Option<Manifest>,
}

impl ComparisonReport {
    pub fn with_manifest(mut self, m: Manifest) -> Self {
        self.manifest = Some(m);
        self
    }
}

/// Metrics of `u − t` over the non-boundary nodes of `u`.
pub fn compare_fields(u: &GridField, t: &GridField) -> Result<ComparisonReport> {
    if u.spec != t.spec || u.values.len() != t.values.len() {
        return Err(DepthError::ShapeMismatch("fields live on different grids".into()));
    }
    let mut res = u.clone();
    let (mut l_inf, mut l1, mut signed_max, mut count) = (0.0f64, 0.0, f64::NEG_INFINITY, 0usize);
    for k in 0..u.values.len() {
        let r = u.values[k] - t.values[k];
        res.values[k] = r;
        if !u.is_interior(k) {
            continue;
        }
        l_inf = l_inf.max(r.abs());
        l1 += r.abs();
        signed_max = signed_max.max(r);
        count += 1;
    }
    if count == 0 {
        signed_max = 0.0;
    }
    Ok(ComparisonReport {
        l_inf,
        l1_mean: if count > 0 { l1 / count as f64 } else { 0.0 },
        signed_max,
        interior_nodes: count,
        residuals: Some(res),
        manifest: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub l_inf: f64,
    /// `l_inf / l_inf` of the next row; absent on the last row and when the
    /// next error is exactly zero.
    pub ratio: Option<f64>,
}

/// Solves on each spacing and compares against the oracle depth. 2D densities
/// need bounded support; the grid is [`GridSpec::around_support`] with two
/// cells of padding. 1D densities use the exact integrator on their support.
pub fn convergence_table(d: &Density, spacings: &[f64], cfg: &SolverConfig) -> Result<Vec<ConvergenceRow>> {
    if spacings.len() < 2 {
        return Err(DepthError::InvalidConfig(format!(
            "convergence table needs at least 2 spacings, got {}",
            spacings.len()
        )));
    }
    let mut errs = Vec::with_capacity(spacings.len());
    for &dx in spacings {
        let (field, grid) = if d.dim() == 1 {
            let Support::Interval(a, b) = d.support() else {
                return Err(DepthError::InvalidConfig("1D density without interval support".into()));
            };
            if !(dx > 0.0) {
                return Err(DepthError::InvalidConfig(format!("spacing must be positive, got {dx}")));
            }
            let n = ((b - a) / dx).round() as usize + 1;
            let f = solver::solve_1d(d, a, b, n)?;
            let g = f.spec;
            (f, g)
        } else {
            let g = GridSpec::around_support(d, dx, 2)?;
            (solver::solve_2d(d, &g, cfg)?.field, g)
        };
        let oracle = solver::oracle_field(d, &grid, &cfg.search)?;
        errs.push(compare_fields(&field, &oracle)?.l_inf);
    }
    Ok(spacings
        .iter()
        .enumerate()
        .map(|(i, &dx)| ConvergenceRow {
            dx,
            l_inf: errs[i],
            ratio: errs.get(i + 1).filter(|e| **e > 0.0).map(|e| errs[i] / e),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::BoundaryKind;

    fn grid() -> GridSpec {
        GridSpec::covering_box([0.0, 0.0], [1.0, 1.0], 0.125, BoundaryKind::TruncatedBox).unwrap()
    }

    #[test]
    fn identical_fields() {
        let t = GridField::from_fn(grid(), |p| p[0] * p[1]);
        let r = compare_fields(&t, &t).unwrap();
        assert_eq!((r.l_inf, r.l1_mean, r.signed_max), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_shift() {
        let t = GridField::from_fn(grid(), |p| p[0] * p[1]);
        let mut u = t.clone();
        u.values.iter_mut().for_each(|v| *v -= 0.01);
        let r = compare_fields(&u, &t).unwrap();
        assert!((r.l_inf - 0.01).abs() < 1e-15);
        assert!((r.signed_max + 0.01).abs() < 1e-15);
        assert!((r.l1_mean - 0.01).abs() < 1e-15);
        assert_eq!(r.interior_nodes, 49);
    }

    #[test]
    fn boundary_nodes_are_ignored() {
        let t = GridField::from_fn(grid(), |_| 0.0);
        let mut u = t.clone();
        u.values[0] = 5.0;
        assert_eq!(compare_fields(&u, &t).unwrap().l_inf, 0.0);
    }

    #[test]
    fn mismatched_grids() {
        let t = GridField::from_fn(grid(), |_| 0.0);
        let g2 = GridSpec::covering_box([0.0, 0.0], [1.0, 1.0], 0.25, BoundaryKind::TruncatedBox).unwrap();
        let u = GridField::from_fn(g2, |_| 0.0);
        assert!(matches!(compare_fields(&u, &t), Err(DepthError::ShapeMismatch(_))));
    }

    #[test]
    fn convergence_needs_two_spacings() {
        let d = Density::uniform_1d(0.0, 1.0).unwrap();
        let e = convergence_table(&d, &[0.1], &SolverConfig::default());
        assert!(matches!(e, Err(DepthError::InvalidConfig(_))));
    }

    #[test]
    fn one_d_table_is_exact() {
        let d = Density::uniform_1d(0.0, 1.0).unwrap();
        let rows = convergence_table(&d, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.l_inf < 1e-12));
    }
}
