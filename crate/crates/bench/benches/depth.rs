use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use depth_hjb::oracle::{tukey_depth, tukey_depth_many};
use depth_hjb::solver::solve_2d;
use depth_hjb::{Density, DirectionSearchConfig, Direction, SliceEstimator, SolverConfig};
use depth_hjb_bench::{band_config, diagonal_points, support_grid, unit_triangle};

fn oracle(c: &mut Criterion) {
    let search = DirectionSearchConfig::default();
    let sq = Density::unit_square();
    let g = Density::standard_gaussian();
    c.bench_function("oracle/square_point", |b| b.iter(|| tukey_depth(&sq, black_box(&[0.3, 0.6]), &search)));
    c.bench_function("oracle/gaussian_point", |b| b.iter(|| tukey_depth(&g, black_box(&[0.7, -0.4]), &search)));
    let pts = diagonal_points(64);
    c.bench_function("oracle/square_64_points", |b| b.iter(|| tukey_depth_many(&sq, black_box(&pts), &search)));
}

fn slices(c: &mut Criterion) {
    let tri = unit_triangle();
    let nu = Direction::from_angle(0.7);
    let analytic = SliceEstimator::new(&tri, depth_hjb::SliceEstimatorConfig::analytic()).unwrap();
    c.bench_function("slice/analytic", |b| b.iter(|| analytic.eval(black_box(&[0.2, 0.3]), &nu)));
    let band = SliceEstimator::new(&tri, depth_hjb::SliceEstimatorConfig::band(12_000, None, 0)).unwrap();
    // first call builds the projection table
    band.eval(&[0.2, 0.3], &nu).unwrap();
    c.bench_function("slice/band_tabulated", |b| b.iter(|| band.eval(black_box(&[0.2, 0.3]), &nu)));
}

fn solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let sq = Density::unit_square();
    let grid = support_grid(&sq, 1.0 / 32.0);
    let cfg = SolverConfig::default();
    group.bench_function("square_1_32", |b| b.iter(|| solve_2d(&sq, &grid, &cfg)));
    let tri = unit_triangle();
    let grid = support_grid(&tri, 1.0 / 32.0);
    let cfg = band_config(12_000, 0);
    group.bench_function("triangle_band_1_32", |b| b.iter(|| solve_2d(&tri, &grid, &cfg)));
    group.finish();
}

criterion_group!(benches, oracle, slices, solves);
criterion_main!(benches);
