use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};
use crate::oracle::DepthResult;
use crate::solver::{GridField, GridSpec, SolveReport};

use super::{ContourSet, Manifest};

fn io_err(e: impl std::fmt::Display) -> DepthError {
    DepthError::Io(e.to_string())
}

/// Solver diagnostics as written to disk. Wall-clock time is left out so that
/// reruns produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub max_update_last_pass: f64,
    pub rhs_floor_violations: Vec<usize>,
    pub fixed_point_failures: usize,
    pub monotonicity_clamps: usize,
    pub correction_sweeps: usize,
    pub band_halfwidth: Option<f64>,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        SolveSummary {
            iterations: r.iterations,
            max_update_last_pass: r.max_update_last_pass,
            rhs_floor_violations: r.rhs_floor_violations.clone(),
            fixed_point_failures: r.fixed_point_failures,
            monotonicity_clamps: r.monotonicity_clamps,
            correction_sweeps: r.correction_sweeps,
            band_halfwidth: r.band_halfwidth,
        }
    }
}

/// JSON written next to a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub manifest: Manifest,
    pub grid: GridSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<SolveSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub n_argmin: usize,
    pub gap: f64,
}

impl OracleRow {
    pub fn new(p: &[f64], r: &DepthResult) -> Self {
        OracleRow { x: p[0], y: p.get(1).copied().unwrap_or(0.0), depth: r.depth, n_argmin: r.argmin_dirs.len(), gap: r.gap }
    }
}

#[derive(Serialize)]
struct FieldRow {
    i: usize,
    j: usize,
    x: f64,
    y: f64,
    u: f64,
    state: &'static str,
}

/// CSV with header `i,j,x,y,u,state`, rows in node order.
pub fn write_field_csv<W: Write>(field: &GridField, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let s = field.spec;
    for k in 0..s.len() {
        let (i, j) = s.coords(k);
        let p = s.node(i, j);
        out.serialize(FieldRow { i, j, x: p[0], y: p[1], u: field.values[k], state: field.states[k].as_str() })
            .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// CSV with header `x,y,depth,n_argmin,gap`.
pub fn write_oracle_csv<W: Write>(rows: &[OracleRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(io_err)?;
    w.write_all(b"\n").map_err(io_err)
}

pub fn read_json<T: DeserializeOwned, R: Read>(r: R) -> Result<T> {
    serde_json::from_reader(r).map_err(|e| DepthError::InvalidConfig(e.to_string()))
}

pub fn write_contours_json<W: Write>(set: &ContourSet, w: W) -> Result<()> {
    write_json(set, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{BoundaryKind, GridSpec};

    #[test]
    fn field_csv_layout() {
        let g = GridSpec::covering_box([0.0, 0.0], [1.0, 1.0], 0.5, BoundaryKind::TruncatedBox).unwrap();
        let f = GridField::from_fn(g, |p| p[0] + p[1]);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,x,y,u,state");
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[5], "1,1,0.5,0.5,1.0,fixed");
        assert_eq!(lines[1], "0,0,0.0,0.0,0.0,boundary");
    }

    #[test]
    fn sidecar_round_trip() {
        let g = GridSpec::covering_box([0.0, 0.0], [1.0, 1.0], 0.5, BoundaryKind::SupportHull).unwrap();
        let side = FieldSidecar { manifest: Manifest::new("solve", vec!["solve".into()]), grid: g, diagnostics: None };
        let mut buf = Vec::new();
        write_json(&side, &mut buf).unwrap();
        let back: FieldSidecar = read_json(&buf[..]).unwrap();
        assert_eq!(back, side);
    }
}
