use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, TAU};

use depth_hjb::oracle::tukey_depth;
use depth_hjb::report::extract_contours;
use depth_hjb::solver::{pushforward, solve_1d, solve_2d};
use depth_hjb::{AffineMap, Density, DensitySpec, Direction, DirectionSearchConfig, GridField, GridSpec, SolverConfig};
use proptest::prelude::*;
use statrs::function::erf::erfc;

fn cfg() -> DirectionSearchConfig {
    DirectionSearchConfig::default()
}

fn triangle() -> Density {
    Density::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
}

fn shipped() -> Vec<Density> {
    vec![
        Density::unit_square(),
        triangle(),
        Density::standard_gaussian(),
        Density::cauchy([0.0, 0.0], 1.0).unwrap(),
        Density::valley(0.01).unwrap(),
    ]
}

fn depth(d: &Density, x: [f64; 2]) -> f64 {
    tukey_depth(d, &x, &cfg()).unwrap().depth
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn depth_lies_in_zero_half(k in 0usize..5, x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let t = depth(&shipped()[k], [x, y]);
        prop_assert!((0.0..=0.5 + 1e-12).contains(&t), "{t}");
    }

    #[test]
    fn depth_is_below_every_halfspace(k in 0usize..5, x in -1.0f64..1.0, y in -1.0f64..1.0, phi in 0.0f64..TAU) {
        let d = &shipped()[k];
        let z = d.halfspace_mass(&[x, y], &Direction::from_angle(phi)).unwrap();
        prop_assert!(depth(d, [x, y]) <= z + 1e-9);
    }

    #[test]
    fn opposite_halfspaces_sum_to_one(k in 0usize..5, x in -1.0f64..1.0, y in -1.0f64..1.0, phi in 0.0f64..TAU) {
        let d = &shipped()[k];
        let a = d.halfspace_mass(&[x, y], &Direction::from_angle(phi)).unwrap();
        let b = d.halfspace_mass(&[x, y], &Direction::from_angle(phi + PI)).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-9, "{a} + {b}");
    }

    #[test]
    fn square_matches_closed_form(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let exact = 2.0 * (x * y).min((1.0 - x) * y).min(x * (1.0 - y)).min((1.0 - x) * (1.0 - y));
        prop_assert!((depth(&Density::unit_square(), [x, y]) - exact).abs() < 1e-9);
    }

    #[test]
    fn gaussian_matches_closed_form(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let exact = 0.5 * erfc(x.hypot(y) * FRAC_1_SQRT_2);
        prop_assert!((depth(&Density::standard_gaussian(), [x, y]) - exact).abs() < 1e-9);
    }

    #[test]
    fn level_sets_are_convex(k in 0usize..5, a in prop::array::uniform2(-1.0f64..1.0), b in prop::array::uniform2(-1.0f64..1.0)) {
        let d = &shipped()[k];
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        prop_assert!(depth(d, mid) >= depth(d, a).min(depth(d, b)) - 1e-8);
    }

    #[test]
    fn affine_images_keep_depth(
        m in prop::array::uniform4(-2.0f64..2.0),
        shift in prop::array::uniform2(-1.0f64..1.0),
        x in 0.05f64..0.95, y in 0.05f64..0.95,
    ) {
        prop_assume!((m[0] * m[3] - m[1] * m[2]).abs() > 0.2);
        let map = AffineMap { matrix: [[m[0], m[1]], [m[2], m[3]]], shift };
        let inv = map.inverse().unwrap();
        // the pushforward is the law of L⁻¹X
        for d in [Density::unit_square(), Density::standard_gaussian()] {
            let image = pushforward(&d, &map).unwrap();
            let t = depth(&image, inv.apply([x, y]));
            prop_assert!((t - depth(&d, [x, y])).abs() < 1e-6, "{t}");
        }
    }

    #[test]
    fn one_dimensional_solve_is_the_tent(a in -3.0f64..3.0, w in 0.1f64..4.0, n in 3usize..300) {
        let d = Density::uniform_1d(a, a + w).unwrap();
        let u = solve_1d(&d, a, a + w, n).unwrap();
        for (i, v) in u.values.iter().enumerate() {
            let s = i as f64 / (n - 1) as f64;
            prop_assert!((v - s.min(1.0 - s)).abs() < 1e-12);
        }
    }

    #[test]
    fn density_specs_round_trip(k in 0usize..5) {
        let d = &shipped()[k];
        let text = serde_json::to_string(d.spec()).unwrap();
        let back: DensitySpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, d.spec());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn coarse_solves_stay_below_depth(shift in prop::array::uniform2(-2.0f64..2.0), s in 0.5f64..2.0) {
        let base = Density::unit_square();
        let map = AffineMap { matrix: [[s, 0.3], [0.0, 1.0 / s]], shift };
        let d = pushforward(&base, &map).unwrap();
        let g = GridSpec::around_support(&d, 1.0 / 24.0, 2).unwrap();
        let u = solve_2d(&d, &g, &SolverConfig::default()).unwrap().field;
        for k in 0..g.len() {
            // nodes within a cell of the hull carry an O(Δ) boundary error
            if d.hull_margin(&g.node_at(k)).is_some_and(|m| m < g.spacing) {
                continue;
            }
            let t = depth(&d, g.node_at(k));
            prop_assert!(u.values[k] <= t + 0.02, "{} > {t}", u.values[k]);
        }
    }
}

#[test]
fn contours_are_nested() {
    let g = GridSpec::around_support(&Density::unit_square(), 1.0 / 32.0, 2).unwrap();
    let exact = GridField::from_fn(g, |p| {
        let (x, y) = (p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0));
        2.0 * (x * y).min((1.0 - x) * y).min(x * (1.0 - y)).min((1.0 - x) * (1.0 - y))
    });
    let set = extract_contours(&exact, &[0.1, 0.2, 0.3]).unwrap();
    let extent = |i: usize| {
        let pts: Vec<[f64; 2]> = set.levels[i].polylines.iter().flat_map(|l| l.points.iter().copied()).collect();
        pts.iter().map(|p| (p[0] - 0.5).abs().max((p[1] - 0.5).abs())).fold(0.0f64, f64::max)
    };
    assert_eq!(set.levels.len(), 3);
    assert!(extent(0) > extent(1) && extent(1) > extent(2));
}

#[test]
fn valley_minimizers_at_the_origin() {
    let d = Density::valley(0.01).unwrap();
    let r = tukey_depth(&d, &[0.0, 0.0], &cfg()).unwrap();
    let mut angles: Vec<f64> = r.argmin_dirs.iter().map(|v| v.y().atan2(v.x())).collect();
    angles.sort_by(f64::total_cmp);
    assert_eq!(angles.len(), 2, "{angles:?}");
    assert!((angles[0] + FRAC_PI_4).abs() < 1e-4 && (angles[1] - FRAC_PI_4).abs() < 1e-4, "{angles:?}");

    // a second, higher basin around φ = π, walled off by ridges at ±3π/4
    let z = |phi: f64| d.halfspace_mass(&[0.0, 0.0], &Direction::from_angle(phi)).unwrap();
    let zpi = z(PI);
    assert!(zpi > r.depth + 0.05);
    for phi in [0.8 * PI, 0.9 * PI, 1.1 * PI, 1.2 * PI] {
        assert!(z(phi) >= zpi - 1e-12);
    }
    assert!(z(0.75 * PI) > zpi + 1e-3 && z(1.25 * PI) > zpi + 1e-3);
}
