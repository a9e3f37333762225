use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use depth_hjb::report::{self, FieldSidecar, OracleRow, SolveSummary};
use depth_hjb::solver::{self, Correction};
use depth_hjb::{
    BoundaryKind, DepthError, Density, DensitySpec, GridField, GridSpec, Manifest, Point2, Scheme, SliceEstimatorConfig,
    SolveReport, SolverConfig, Support,
};
use serde::Serialize;

use crate::args::{
    Cli, Command, ContourArgs, ConvergeArgs, CorrectionArg, Figure, GridOpts, OracleArgs, ReproArgs, RhsArg, SchemeArg,
    SolveArgs, SolverOpts,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input files.
    Usage(String),
    Run(DepthError),
}

impl From<DepthError> for CliError {
    fn from(e: DepthError) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(DepthError::NoConvergence { .. }) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Output directory; every file goes through here so the manifest can be
/// written before anything else.
struct Out {
    dir: PathBuf,
}

impl Out {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Out { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> depth_hjb::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::Run(DepthError::Io(e.to_string())))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| report::write_json(value, w))
    }

    fn field(&self, name: &str, field: &GridField) -> Result<()> {
        self.write(name, |w| report::write_field_csv(field, w))
    }
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    match cli.command {
        Command::Solve(a) => solve_cmd(&a, "solve", argv).map(|_| ()),
        Command::Compare(a) => compare_cmd(&a, argv),
        Command::Contours(a) => contours_cmd(&a, argv),
        Command::Oracle(a) => oracle_cmd(&a, argv),
        Command::Converge(a) => converge_cmd(&a, argv),
        Command::Repro(a) => repro_cmd(&a, argv),
    }
}

fn load_density(path: &Path) -> Result<Density> {
    let file = File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let spec: DensitySpec =
        report::read_json(file).map_err(|e| usage(format!("invalid density file {}: {e}", path.display())))?;
    Density::new(spec).map_err(|e| usage(format!("invalid density file {}: {e}", path.display())))
}

fn solver_config(o: &SolverOpts) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        scheme: match o.scheme {
            SchemeArg::Fm => Scheme::FastMarchingFixedPoint,
            SchemeArg::Lf => Scheme::LaxFriedrichsSweeping,
        },
        correction: match o.correction {
            CorrectionArg::Auto => Correction::Auto,
            CorrectionArg::Always => Correction::Always,
            CorrectionArg::Never => Correction::Never,
        },
        slice: match o.rhs {
            RhsArg::Analytic => SliceEstimatorConfig::analytic(),
            RhsArg::Band => SliceEstimatorConfig::band(o.samples, o.band, o.seed),
        },
        ..SolverConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn interval(d: &Density) -> Result<(f64, f64)> {
    match d.support() {
        Support::Interval(a, b) => Ok((a, b)),
        _ => Err(usage("1D density without interval support")),
    }
}

/// Grid for a solve: the truncation box when given, else the support hull
/// padded by two cells; 1D densities get a line over their support.
fn plan_grid(d: &Density, g: &GridOpts) -> Result<GridSpec> {
    if g.dx <= 0.0 {
        return Err(usage(format!("--dx must be positive, got {}", g.dx)));
    }
    if d.dim() == 1 {
        let (a, b) = interval(d)?;
        let n = ((b - a) / g.dx).round() as usize + 1;
        return GridSpec::line(a, b, n).map_err(|e| usage(e.to_string()));
    }
    let grid = match g.bbox {
        Some([x0, y0, x1, y1]) => GridSpec::covering_box([x0, y0], [x1, y1], g.dx, BoundaryKind::TruncatedBox),
        None if d.is_bounded() => GridSpec::around_support(d, g.dx, 2),
        None => return Err(usage(format!("{} has unbounded support; pass --box xlo,ylo,xhi,yhi", d.kind_name()))),
    };
    grid.map_err(|e| usage(e.to_string()))
}

fn manifest(command: &str, argv: Vec<String>, d: &Density, cfg: Option<&SolverConfig>) -> Manifest {
    let mut m = Manifest::new(command, argv);
    m.density = Some(d.spec().clone());
    if let Some(cfg) = cfg {
        if d.dim() == 2 {
            m.solver = Some(*cfg);
            if cfg.slice.method == depth_hjb::SliceMethod::SampleBand {
                m.seeds = vec![cfg.slice.rng_seed];
            }
        }
        m.search = Some(cfg.search);
    }
    m
}

struct Solved {
    density: Density,
    cfg: SolverConfig,
    field: GridField,
    report: Option<SolveReport>,
    manifest: Manifest,
    out: Out,
}

fn solve_with(d: Density, grid: GridSpec, cfg: SolverConfig, mut m: Manifest, out_dir: &Path) -> Result<Solved> {
    m.grid = Some(grid);
    let out = Out::create(out_dir)?;
    out.json("manifest.json", &m)?;
    let (field, report) = if d.dim() == 1 {
        let (a, b) = interval(&d)?;
        (solver::solve_1d(&d, a, b, grid.nx)?, None)
    } else {
        let r = solver::solve_2d(&d, &grid, &cfg)?;
        if !r.rhs_floor_violations.is_empty() {
            eprintln!("warning: right-hand side below the floor at {} interior nodes", r.rhs_floor_violations.len());
        }
        (r.field.clone(), Some(r))
    };
    out.field("field.csv", &field)?;
    let sidecar = FieldSidecar { manifest: m.clone(), grid, diagnostics: report.as_ref().map(SolveSummary::from) };
    out.json("field.json", &sidecar)?;
    Ok(Solved { density: d, cfg, field, report, manifest: m, out })
}

fn solve_cmd(a: &SolveArgs, command: &str, argv: Vec<String>) -> Result<Solved> {
    let d = load_density(&a.io.density)?;
    let cfg = solver_config(&a.solver)?;
    let grid = plan_grid(&d, &a.grid)?;
    let m = manifest(command, argv, &d, Some(&cfg));
    let s = solve_with(d, grid, cfg, m, &a.io.out)?;
    if let Some(r) = &s.report {
        match s.cfg.scheme {
            Scheme::FastMarchingFixedPoint => println!(
                "solved {}x{} grid: {} nodes accepted, {} correction passes",
                grid.nx, grid.ny, r.iterations, r.correction_sweeps
            ),
            Scheme::LaxFriedrichsSweeping => {
                println!("solved {}x{} grid: {} sweeps, last update {:.1e}", grid.nx, grid.ny, r.iterations, r.max_update_last_pass)
            }
        }
    }
    Ok(s)
}

fn compare_against_oracle(s: &Solved) -> Result<()> {
    let oracle = solver::oracle_field(&s.density, &s.field.spec, &s.cfg.search)?;
    let cmp = report::compare_fields(&s.field, &oracle)?;
    if let Some(res) = &cmp.residuals {
        s.out.field("residual.csv", res)?;
    }
    let cmp = cmp.with_manifest(s.manifest.clone());
    s.out.json("comparison.json", &cmp)?;
    println!("l_inf {:.6} l1_mean {:.6} signed_max {:.6}", cmp.l_inf, cmp.l1_mean, cmp.signed_max);
    Ok(())
}

fn compare_cmd(a: &SolveArgs, argv: Vec<String>) -> Result<()> {
    let s = solve_cmd(a, "compare", argv)?;
    compare_against_oracle(&s)
}

fn write_contours(s: &Solved, levels: &[f64]) -> Result<()> {
    let set = report::extract_contours(&s.field, levels)?;
    for l in &set.empty_levels {
        eprintln!("warning: level {l} is outside the field range");
    }
    s.out.write("contours.json", |w| report::write_contours_json(&set, w))
}

fn contours_cmd(a: &ContourArgs, argv: Vec<String>) -> Result<()> {
    let d = load_density(&a.solve.io.density)?;
    if d.dim() != 2 {
        return Err(usage("contours need a 2D density"));
    }
    let cfg = solver_config(&a.solve.solver)?;
    let grid = plan_grid(&d, &a.solve.grid)?;
    let mut m = manifest("contours", argv, &d, Some(&cfg));
    m.levels = a.levels.clone();
    let s = solve_with(d, grid, cfg, m, &a.solve.io.out)?;
    write_contours(&s, &a.levels)
}

fn read_points(path: &Path, dim: usize) -> Result<Vec<Point2>> {
    let bad = |e: &dyn std::fmt::Display| usage(format!("cannot read points from {}: {e}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_path(path).map_err(|e| bad(&e))?;
    let mut pts = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(&e))?;
        let vals: std::result::Result<Vec<f64>, _> = rec.iter().take(dim).map(str::parse::<f64>).collect();
        match vals {
            Ok(v) if v.len() == dim => pts.push([v[0], if dim == 2 { v[1] } else { 0.0 }]),
            // a header line
            Err(_) if row == 0 => continue,
            _ => return Err(bad(&format!("row {} needs {dim} numbers", row + 1))),
        }
    }
    Ok(pts)
}

fn grid_points(d: &Density, (n, m): (usize, usize), bbox: Option<[f64; 4]>) -> Result<Vec<Point2>> {
    let lin = |lo: f64, hi: f64, k: usize, i: usize| if k == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 };
    if d.dim() == 1 {
        let (a, b) = match bbox {
            Some([x0, _, x1, _]) => (x0, x1),
            None => interval(d)?,
        };
        return Ok((0..n).map(|i| [lin(a, b, n, i), 0.0]).collect());
    }
    let (lo, hi) = match (bbox, d.bounding_box()) {
        (Some([x0, y0, x1, y1]), _) => ([x0, y0], [x1, y1]),
        (None, Some(b)) => b,
        (None, None) => return Err(usage(format!("{} has unbounded support; pass --box", d.kind_name()))),
    };
    let mut pts = Vec::with_capacity(n * m);
    for j in 0..m {
        for i in 0..n {
            pts.push([lin(lo[0], hi[0], n, i), lin(lo[1], hi[1], m, j)]);
        }
    }
    Ok(pts)
}

fn oracle_cmd(a: &OracleArgs, argv: Vec<String>) -> Result<()> {
    let d = load_density(&a.io.density)?;
    let pts = match (&a.points, a.grid) {
        (Some(p), _) => read_points(p, d.dim())?,
        (None, Some(dims)) => grid_points(&d, dims, a.bbox)?,
        (None, None) => return Err(usage("pass --grid or --points")),
    };
    let cfg = SolverConfig::default();
    let mut m = manifest("oracle", argv, &d, None);
    m.search = Some(cfg.search);
    let out = Out::create(&a.io.out)?;
    out.json("manifest.json", &m)?;
    let res = depth_hjb::oracle::tukey_depth_many(&d, &pts, &cfg.search)?;
    let rows: Vec<OracleRow> = pts.iter().zip(&res).map(|(p, r)| OracleRow::new(&p[..d.dim()], r)).collect();
    out.write("oracle.csv", |w| report::write_oracle_csv(&rows, w))?;
    println!("{} points", rows.len());
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceCsvRow {
    dx: f64,
    l_inf: f64,
    ratio: Option<f64>,
}

fn converge_cmd(a: &ConvergeArgs, argv: Vec<String>) -> Result<()> {
    let d = load_density(&a.io.density)?;
    let cfg = solver_config(&a.solver)?;
    if a.spacings.len() < 2 {
        return Err(usage("--spacings needs at least two values"));
    }
    if d.dim() == 2 && !d.is_bounded() {
        return Err(usage("convergence tables need a bounded support"));
    }
    let mut m = manifest("converge", argv, &d, Some(&cfg));
    m.spacings = a.spacings.clone();
    let out = Out::create(&a.io.out)?;
    out.json("manifest.json", &m)?;
    let rows = report::convergence_table(&d, &a.spacings, &cfg)?;
    out.write("convergence.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        for r in &rows {
            c.serialize(ConvergenceCsvRow { dx: r.dx, l_inf: r.l_inf, ratio: r.ratio })
                .map_err(|e| DepthError::Io(e.to_string()))?;
        }
        c.flush().map_err(|e| DepthError::Io(e.to_string()))
    })?;
    for r in &rows {
        match r.ratio {
            Some(q) => println!("dx {:.6} l_inf {:.3e} ratio {q:.3}", r.dx, r.l_inf),
            None => println!("dx {:.6} l_inf {:.3e}", r.dx, r.l_inf),
        }
    }
    Ok(())
}

/// Density, grid and solver configuration of a canned figure run.
pub fn figure_setup(fig: Figure, seed: u64) -> depth_hjb::Result<(Density, GridSpec, SolverConfig)> {
    let mut cfg = SolverConfig::default();
    let (d, grid) = match fig {
        Figure::Fig4 => {
            let d = Density::unit_square();
            let g = GridSpec::around_support(&d, 1.0 / 128.0, 2)?;
            (d, g)
        }
        Figure::Fig5 => {
            let d = Density::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])?;
            let g = GridSpec::around_support(&d, 1.0 / 128.0, 2)?;
            cfg.slice = SliceEstimatorConfig::band(12_000, None, seed);
            (d, g)
        }
        Figure::Fig6 => {
            let g = GridSpec::covering_box([-3.0, -3.0], [3.0, 3.0], 1.0 / 128.0, BoundaryKind::TruncatedBox)?;
            cfg.slice = SliceEstimatorConfig::band(12_000, None, seed);
            (Density::standard_gaussian(), g)
        }
        Figure::Fig7 => {
            let g = GridSpec::covering_box([-5.0, -5.0], [5.0, 5.0], 10.0 / 256.0, BoundaryKind::TruncatedBox)?;
            cfg.slice = SliceEstimatorConfig::band(10_000, None, seed);
            (Density::cauchy([0.0, 0.0], 1.0)?, g)
        }
    };
    Ok((d, grid, cfg))
}

fn repro_cmd(a: &ReproArgs, argv: Vec<String>) -> Result<()> {
    let (d, grid, cfg) = figure_setup(a.figure, a.seed)?;
    let name = format!("{:?}", a.figure).to_lowercase();
    let mut m = manifest("repro", argv, &d, Some(&cfg));
    m.figure = Some(name.clone());
    m.levels = a.levels.clone();
    let s = solve_with(d, grid, cfg, m, &a.out)?;
    println!("{name}: {}x{} grid", grid.nx, grid.ny);
    compare_against_oracle(&s)?;
    write_contours(&s, &a.levels)
}
