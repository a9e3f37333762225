//! Grid solvers for `|∇u| = slice(x, ∇u/|∇u|)` with Dirichlet data.

mod affine;
mod correction;
mod fmm;
mod godunov;
mod grid;
mod one_d;
mod rhs;
mod sweeping;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{DepthError, Result};
use crate::oracle::DirectionSearchConfig;
use crate::slice::{SliceEstimator, SliceEstimatorConfig, SliceMethod};

pub use affine::{affine_transform_solve, pushforward};
pub use godunov::upwind_update;
pub use grid::{BoundaryKind, GridField, GridSpec, NodeState};
pub use one_d::{sawtooth, solve_1d, supersolution_defect_1d, supersolution_violations_1d};
pub use rhs::{rhs_at, Rhs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FastMarchingFixedPoint,
    LaxFriedrichsSweeping,
}

/// When fast marching is followed by the monotone correction sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// Bounded supports only. Fast marching overshoots where
    /// `{p : |p| <= f(x, p/|p|)}` is nonconvex (polygon corners, the valley
    /// density); on truncation boxes it is left alone.
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dir_fixed_point_tol: f64,
    pub dir_fixed_point_max_iters: usize,
    pub sweep_tol: f64,
    pub max_sweeps: usize,
    /// Artificial viscosity of the Lax-Friedrichs Hamiltonian, per axis.
    pub lf_viscosity: f64,
    /// Run the sweep orderings in reverse.
    pub reverse_sweeps: bool,
    pub correction: Correction,
    /// Interior right-hand-side values below this are reported.
    pub rhs_floor: f64,
    /// Size of the direction grid for the direction-free right-hand side.
    pub direction_count: usize,
    pub slice: SliceEstimatorConfig,
    /// Direction search used for boundary data on truncation boxes.
    pub search: DirectionSearchConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scheme: Scheme::FastMarchingFixedPoint,
            dir_fixed_point_tol: 1e-10,
            dir_fixed_point_max_iters: 50,
            sweep_tol: 1e-9,
            max_sweeps: 20_000,
            lf_viscosity: 1.0,
            reverse_sweeps: false,
            correction: Correction::Auto,
            rhs_floor: 1e-12,
            direction_count: 360,
            slice: SliceEstimatorConfig::default(),
            search: DirectionSearchConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_slice(mut self, slice: SliceEstimatorConfig) -> Self {
        self.slice = slice;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dir_fixed_point_tol > 0.0 && self.sweep_tol > 0.0) {
            return Err(DepthError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.dir_fixed_point_max_iters == 0 || self.max_sweeps == 0 {
            return Err(DepthError::InvalidConfig("iteration caps must be at least 1".into()));
        }
        if !(self.lf_viscosity > 0.0) {
            return Err(DepthError::InvalidConfig("viscosity must be positive".into()));
        }
        if !(self.rhs_floor >= 0.0) {
            return Err(DepthError::InvalidConfig("rhs floor must be non-negative".into()));
        }
        if self.direction_count < 2 {
            return Err(DepthError::InvalidConfig("direction_count must be at least 2".into()));
        }
        self.slice.validate()?;
        self.search.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Diagnostics {
    iterations: usize,
    max_update_last_pass: f64,
    floor_hits: Vec<usize>,
    fixed_point_failures: usize,
    monotonicity_clamps: usize,
    correction_sweeps: usize,
}

impl Diagnostics {
    fn flag_floor(&mut self, k: usize) {
        if self.floor_hits.last() != Some(&k) {
            self.floor_hits.push(k);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub field: GridField,
    /// Accepted nodes for fast marching, Gauss-Seidel passes for sweeping.
    pub iterations: usize,
    /// Sweeping: max update of the final pass. Fast marching: largest
    /// direction fixed-point change among nodes that hit the iteration cap.
    pub max_update_last_pass: f64,
    /// Interior nodes where the right-hand side fell below the floor.
    pub rhs_floor_violations: Vec<usize>,
    pub fixed_point_failures: usize,
    /// Tentative values raised to the current front to keep acceptance monotone.
    pub monotonicity_clamps: usize,
    /// Gauss-Seidel passes of the monotone correction run after fast marching.
    pub correction_sweeps: usize,
    pub band_halfwidth: Option<f64>,
    pub runtime_ms: u64,
}

/// Node states before a solve: boundary outside (or on) the support hull and,
/// for truncation boxes, on the outer ring.
pub fn initial_states(d: &Density, grid: &GridSpec) -> Result<Vec<NodeState>> {
    let mut states = vec![NodeState::Tentative; grid.len()];
    for (k, st) in states.iter_mut().enumerate() {
        let p = grid.node_at(k);
        let outside = d.hull_margin(&p).is_some_and(|m| m <= grid::HULL_EPS);
        if outside || (grid.boundary == BoundaryKind::TruncatedBox && grid.is_edge(k)) {
            *st = NodeState::Boundary;
        } else if grid.is_edge(k) {
            return Err(DepthError::InvalidConfig(
                "support hull must lie strictly inside the grid; use a truncation box".into(),
            ));
        }
    }
    Ok(states)
}

/// Builds the field with boundary data filled in and interior nodes tentative.
pub fn initial_field(d: &Density, grid: &GridSpec, search: &DirectionSearchConfig) -> Result<GridField> {
    let states = initial_states(d, grid)?;
    let mut field = GridField::new(*grid);
    field.states = states;
    if grid.boundary == BoundaryKind::TruncatedBox {
        let edge: Vec<usize> = (0..grid.len())
            .filter(|&k| grid.is_edge(k) && d.hull_margin(&grid.node_at(k)).is_none_or(|m| m > grid::HULL_EPS))
            .collect();
        let pts: Vec<_> = edge.iter().map(|&k| grid.node_at(k)).collect();
        let depths = crate::oracle::tukey_depth_many(d, &pts, search)?;
        for (k, r) in edge.into_iter().zip(depths) {
            field.values[k] = r.depth;
        }
    }
    Ok(field)
}

/// Solves the depth equation for a 2D density on `grid`.
pub fn solve_2d(d: &Density, grid: &GridSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    grid.validate()?;
    if d.dim() != 2 {
        return Err(DepthError::DimensionMismatch { expected: 2, got: d.dim() });
    }
    if grid.is_1d() {
        return Err(DepthError::InvalidConfig("2D solve needs a 2D grid".into()));
    }
    if grid.boundary == BoundaryKind::SupportHull && !d.is_bounded() {
        return Err(DepthError::InvalidConfig("unbounded support needs a truncation box".into()));
    }
    let start = Instant::now();
    let mut slice = cfg.slice;
    if slice.method == SliceMethod::SampleBand && slice.band_halfwidth.is_none() && !d.is_bounded() {
        slice.band_halfwidth = Some(grid.diameter() / 100.0);
    }
    let est = SliceEstimator::new(d, slice)?;
    let band_halfwidth = est.band_halfwidth();
    let rhs = Rhs::from_estimator(est, cfg.direction_count);
    let mut field = initial_field(d, grid, &cfg.search)?;
    let bounded = d.is_bounded();
    let diag = match cfg.scheme {
        Scheme::FastMarchingFixedPoint => {
            let mut d = fmm::run(&mut field, &rhs, cfg)?;
            let correct = match cfg.correction {
                Correction::Auto => bounded,
                Correction::Always => true,
                Correction::Never => false,
            };
            if correct {
                d.correction_sweeps = correction::run(&mut field, &rhs, cfg)?;
            }
            d
        }
        Scheme::LaxFriedrichsSweeping => sweeping::run(&mut field, &rhs, cfg)?,
    };
    let mut floor = diag.floor_hits;
    floor.sort_unstable();
    floor.dedup();
    Ok(SolveReport {
        field,
        iterations: diag.iterations,
        max_update_last_pass: diag.max_update_last_pass,
        rhs_floor_violations: floor,
        fixed_point_failures: diag.fixed_point_failures,
        monotonicity_clamps: diag.monotonicity_clamps,
        correction_sweeps: diag.correction_sweeps,
        band_halfwidth,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Oracle depth at every node, with the same node states a solve would use.
pub fn oracle_field(d: &Density, grid: &GridSpec, search: &DirectionSearchConfig) -> Result<GridField> {
    let states = if grid.is_1d() {
        (0..grid.len()).map(|k| if grid.is_edge(k) { NodeState::Boundary } else { NodeState::Fixed }).collect()
    } else {
        initial_states(d, grid)?
            .into_iter()
            .map(|s| if s == NodeState::Tentative { NodeState::Fixed } else { s })
            .collect()
    };
    let pts = grid.points();
    let depths = crate::oracle::tukey_depth_many(d, &pts, search)?;
    Ok(GridField { spec: *grid, values: depths.into_iter().map(|r| r.depth).collect(), states })
}

/// `max_k (u_k − T_k)` over all nodes: how far the computed field rises above
/// the depth, which it should never do beyond discretization error.
pub fn check_discrete_supersolution_bound(field: &GridField, oracle: &GridField) -> Result<f64> {
    if field.spec != oracle.spec {
        return Err(DepthError::ShapeMismatch("fields live on different grids".into()));
    }
    Ok(field.values.iter().zip(&oracle.values).map(|(u, t)| u - t).fold(f64::NEG_INFINITY, f64::max))
}
