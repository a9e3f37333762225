//! Halfspace (Tukey) depth of absolutely continuous distributions in one and
//! two dimensions, computed two ways: by minimizing the halfspace mass over
//! directions, and as the viscosity solution of
//!
//! ```text
//! |∇u(x)| = ∫_{(y-x)·∇u/|∇u| = 0} ρ(y) dH¹(y),   u = 0 on ∂ co(supp ρ).
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod direction;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod slice;
pub mod solver;
pub mod valley;

pub use density::{Density, DensitySpec, Support};
pub use direction::Direction;
pub use error::{DepthError, Result};
pub use geometry::{AffineMap, ConvexPolygon, Point2};
pub use oracle::{DepthResult, DirectionSearchConfig};
pub use report::{ComparisonReport, ContourSet, ConvergenceRow, Manifest, Polyline};
pub use slice::{SliceEstimator, SliceEstimatorConfig, SliceMethod};
pub use solver::{BoundaryKind, Correction, GridField, GridSpec, NodeState, Scheme, SolveReport, SolverConfig};
