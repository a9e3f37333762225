use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/densities").join(name)
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depth-hjb")).args(args).output().expect("spawn depth-hjb")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&bin(&["--help"])), 0);
    assert_eq!(code(&bin(&["solve", "--help"])), 0);
    assert_eq!(code(&bin(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bin(&["--bogus"])), 1);
    assert_eq!(code(&bin(&[])), 1);
    assert_eq!(code(&bin(&["oracle", "--density", "x.json"])), 1, "needs --grid or --points");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let gauss = fixture("gaussian.json");
    let o = bin(&["solve", "--density", gauss.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 1, "unbounded support without --box");
    assert!(String::from_utf8_lossy(&o.stderr).contains("--box"));

    let missing = dir.path().join("nope.json");
    assert_eq!(code(&bin(&["solve", "--density", missing.to_str().unwrap(), "--out", out])), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "uniform_convex_polygon", "vertices": [[0,0],[1,0]]}"#).unwrap();
    assert_eq!(code(&bin(&["solve", "--density", bad.to_str().unwrap(), "--out", out])), 1);
}

#[test]
fn oracle_grid_on_square() {
    let dir = tempfile::tempdir().unwrap();
    let sq = fixture("square.json");
    let o = bin(&["oracle", "--density", sq.to_str().unwrap(), "--grid", "33x33", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let csv = read(&dir.path().join("oracle.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,depth,n_argmin,gap"));
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').take(3).map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 33 * 33);
    for r in &rows {
        let (x, y) = (r[0], r[1]);
        let exact = 2.0 * (x * y).min(x * (1.0 - y)).min((1.0 - x) * y).min((1.0 - x) * (1.0 - y));
        assert!((r[2] - exact).abs() < 1e-9, "({x}, {y}): {} vs {exact}", r[2]);
    }
    let center = rows.iter().find(|r| r[0] == 0.5 && r[1] == 0.5).unwrap();
    assert!((center[2] - 0.5).abs() < 1e-12);
}

#[test]
fn oracle_points_file_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "x,y\n0.5,0.5\n0.25,0.5\n").unwrap();
    let sq = fixture("square.json");
    let out = dir.path().join("o");
    let o = bin(&["oracle", "--density", sq.to_str().unwrap(), "--points", pts.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("oracle.csv"));
    let depths: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(depths.len(), 2);
    assert!((depths[0] - 0.5).abs() < 1e-12);
    assert!((depths[1] - 0.25).abs() < 1e-12);
}

#[test]
fn solve_writes_manifest_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let sq = fixture("square.json");
    let o = bin(&["compare", "--density", sq.to_str().unwrap(), "--dx", "1/16", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "field.csv", "field.json", "comparison.json", "residual.csv"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "compare");
    assert_eq!(manifest["density"]["kind"], "uniform_convex_polygon");
    assert!(manifest["grid"].is_object());

    let cmp: serde_json::Value = serde_json::from_str(&read(&dir.path().join("comparison.json"))).unwrap();
    assert!(cmp["l_inf"].as_f64().unwrap() < 0.02);

    // the manifest goes out before the solve, so it is never newer than the field
    let t = |f: &str| std::fs::metadata(dir.path().join(f)).unwrap().modified().unwrap();
    assert!(t("manifest.json") <= t("field.csv"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let tri = fixture("triangle.json");
    let out = dir.path().join("run");
    let args = |o: &str| {
        bin(&[
            "contours", "--density", tri.to_str().unwrap(), "--dx", "1/32", "--rhs", "band", "--samples", "4000",
            "--seed", "3", "--levels", "0.1,0.2", "--out", o,
        ])
    };
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let _ = std::fs::remove_dir_all(&out);
        let o = args(out.to_str().unwrap());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let files: Vec<(String, Vec<u8>)> = ["manifest.json", "field.csv", "field.json", "contours.json"]
            .iter()
            .map(|f| (f.to_string(), std::fs::read(out.join(f)).unwrap()))
            .collect();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn one_dimensional_solve_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let u = fixture("uniform1d.json");
    let o = bin(&["solve", "--density", u.to_str().unwrap(), "--dx", "1/128", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("field.csv"));
    let mut n = 0;
    for l in csv.lines().skip(1) {
        let c: Vec<&str> = l.split(',').collect();
        let x: f64 = c[2].parse().unwrap();
        let v: f64 = c[4].parse().unwrap();
        assert!((v - x.min(1.0 - x)).abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 129);
}

#[test]
fn converge_needs_two_spacings() {
    let dir = tempfile::tempdir().unwrap();
    let sq = fixture("square.json");
    let o = bin(&["converge", "--density", sq.to_str().unwrap(), "--spacings", "1/16", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn no_convergence_exits_two() {
    // the Lax-Friedrichs sweeps stall on the triangle's nonconvex Hamiltonian
    let dir = tempfile::tempdir().unwrap();
    let tri = fixture("triangle.json");
    let o = bin(&["solve", "--density", tri.to_str().unwrap(), "--dx", "1/32", "--scheme", "lf", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no convergence"));
    assert!(dir.path().join("manifest.json").is_file());
    assert!(!dir.path().join("field.csv").exists());
}
