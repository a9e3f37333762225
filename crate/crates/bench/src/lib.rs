//! Shared setup for the criterion benchmarks.

use depth_hjb::{Density, GridSpec, Point2, SliceEstimatorConfig, SolverConfig};

pub fn unit_triangle() -> Density {
    Density::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).expect("valid triangle")
}

/// Support grid padded by two cells.
pub fn support_grid(d: &Density, dx: f64) -> GridSpec {
    GridSpec::around_support(d, dx, 2).expect("bounded support")
}

pub fn band_config(samples: usize, seed: u64) -> SolverConfig {
    SolverConfig::default().with_slice(SliceEstimatorConfig::band(samples, None, seed))
}

/// `n` points on a diagonal through the interior of the unit square.
pub fn diagonal_points(n: usize) -> Vec<Point2> {
    (0..n).map(|i| {
        let t = 0.1 + 0.8 * i as f64 / (n.max(2) - 1) as f64;
        [t, 0.5 * t + 0.2]
    }).collect()
}
