use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "depth-hjb", version, about = "Halfspace depth by direct minimization and by a Hamilton-Jacobi solve")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the depth equation on a grid and write the field.
    Solve(SolveArgs),
    /// Direct-minimization depth at grid nodes or listed points.
    Oracle(OracleArgs),
    /// Solve, then compare against the oracle depth on the same grid.
    Compare(SolveArgs),
    /// Solve, then extract level sets by marching squares.
    Contours(ContourArgs),
    /// Error against the oracle over a list of spacings.
    Converge(ConvergeArgs),
    /// Rerun one of the canned figure configurations.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Io {
    /// Density description (JSON).
    #[arg(long)]
    pub density: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Fm,
    Lf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhsArg {
    Analytic,
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Args)]
pub struct SolverOpts {
    #[arg(long, value_enum, default_value_t = SchemeArg::Fm)]
    pub scheme: SchemeArg,
    /// Right-hand side: closed-form slice integrals or the sampled band estimator.
    #[arg(long, value_enum, default_value_t = RhsArg::Analytic)]
    pub rhs: RhsArg,
    /// Sample count for `--rhs band`.
    #[arg(long, default_value_t = 12_000)]
    pub samples: usize,
    /// Band half-width for `--rhs band`; defaults to 1/100 of the domain diameter.
    #[arg(long)]
    pub band: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monotone correction sweeps after fast marching.
    #[arg(long, value_enum, default_value_t = CorrectionArg::Auto)]
    pub correction: CorrectionArg,
}

#[derive(Debug, Clone, Args)]
pub struct GridOpts {
    /// Grid spacing; fractions such as 1/128 are accepted.
    #[arg(long, value_parser = parse_real, default_value = "1/128")]
    pub dx: f64,
    /// Truncation box `xlo,ylo,xhi,yhi`; required for unbounded densities.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub grid: GridOpts,
    #[command(flatten)]
    pub solver: SolverOpts,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Comma-separated depth levels.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("where").required(true).args(["grid", "points"])))]
pub struct OracleArgs {
    #[command(flatten)]
    pub io: Io,
    /// Node counts `NxM` over the support's bounding box (or `--box`); `N` for 1D.
    #[arg(long, value_parser = parse_dims)]
    pub grid: Option<(usize, usize)>,
    /// CSV of query points, one `x,y` per row (`x` alone in 1D).
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub io: Io,
    /// Comma-separated spacings, at least two.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "1/32,1/64,1/128")]
    pub spacings: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Uniform square, spacing 1/128, closed-form right-hand side.
    Fig4,
    /// Uniform triangle, spacing 1/128, 12000 samples.
    Fig5,
    /// Standard Gaussian on [-3,3]², spacing 1/128, 12000 samples.
    Fig6,
    /// Standard Cauchy on [-5,5]², spacing 10/256, 10000 samples.
    Fig7,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "0.1,0.2,0.3,0.4")]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A real number or a fraction `p/q`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

fn parse_box(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s.split(',').map(parse_real).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] if c > a && d > b => Ok([a, b, c, d]),
        [_, _, _, _] => Err("box must satisfy xlo < xhi and ylo < yhi".into()),
        _ => Err(format!("expected xlo,ylo,xhi,yhi, got {s:?}")),
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let count = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad node count in {s:?}"));
    let (n, m) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (count(a)?, count(b)?),
        None => (count(s)?, 1),
    };
    if n < 2 || m < 1 {
        return Err(format!("grid needs at least 2 nodes per axis, got {s:?}"));
    }
    Ok((n, m))
}
