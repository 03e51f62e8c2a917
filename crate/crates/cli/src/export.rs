//! File formats: CSV with '#'-prefixed provenance headers, and an optional
//! 8-bit portable graymap per pattern. Values print as `{:.8e}` (9
//! significant digits), and all writers are deterministic: the same data
//! produces the same bytes, whatever thread count produced the data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lzs_core::spectral::{ArcPrediction, RidgePoint};
use lzs_core::{FtMap, PatternGrid};
use ndarray::Array2;

use crate::error::CliError;

fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt).collect::<Vec<_>>().join(",")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(CliError::io(path))
}

/// Pattern CSV: provenance lines, the width axis, then one row per
/// amplitude sample holding the amplitude and its probabilities.
pub fn write_pattern(path: &Path, grid: &PatternGrid, provenance: &[String]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# qubit return probability over a (width, amplitude) grid\n");
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "# t_axis_ns = {}", join(grid.t_axis().iter().copied()));
    out.push_str("# rows: amplitude, then one probability per width sample\n");
    for (i, row) in grid.values().outer_iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt(grid.a_axis()[i]), join(row.iter().copied()));
    }
    write_file(path, &out)
}

/// Inverse of [`write_pattern`], exact to print precision. Provenance lines
/// other than the width axis are ignored.
pub fn read_pattern(path: &Path) -> Result<PatternGrid, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut t_axis: Option<Vec<f64>> = None;
    let mut a_axis = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let bad = |line: usize, msg: &str| {
        CliError::Config(format!("{}:{line}: {msg}", path.display()))
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if let Some(rest) = raw.strip_prefix('#') {
            if let Some(axis) = rest.trim().strip_prefix("t_axis_ns =") {
                let parsed: Result<Vec<f64>, _> =
                    axis.trim().split(',').map(str::parse::<f64>).collect();
                t_axis =
                    Some(parsed.map_err(|_| bad(line, "unreadable number in the width axis"))?);
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let mut values = raw.split(',').map(str::parse::<f64>);
        let a = values
            .next()
            .ok_or_else(|| bad(line, "empty row"))?
            .map_err(|_| bad(line, "unreadable amplitude"))?;
        let row: Result<Vec<f64>, _> = values.collect();
        a_axis.push(a);
        rows.push(row.map_err(|_| bad(line, "unreadable probability"))?);
    }
    let t_axis = t_axis.ok_or_else(|| bad(0, "missing '# t_axis_ns =' header"))?;
    let n_t = t_axis.len();
    if rows.is_empty() {
        return Err(bad(0, "no data rows"));
    }
    if rows.iter().any(|r| r.len() != n_t) {
        return Err(bad(0, "row length does not match the width axis"));
    }
    let values = Array2::from_shape_vec((rows.len(), n_t), rows.concat())
        .expect("shape checked above");
    PatternGrid::new(values, t_axis, a_axis)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Transform CSV, mirroring the pattern layout: one row per amplitude
/// sample with that column's bin magnitudes.
pub fn write_ftmap(path: &Path, map: &FtMap, provenance: &[String]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# magnitude half-spectrum of each constant-amplitude row\n");
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "# k_axis_rad_ns = {}", join(map.k_axis().iter().copied()));
    out.push_str("# rows: amplitude, then one magnitude per frequency bin\n");
    for (col, &a) in map.a_axis().iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt(a), join(map.magnitudes().column(col).iter().copied()));
    }
    write_file(path, &out)
}

pub fn write_arcs(path: &Path, arcs: &ArcPrediction, provenance: &[String]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# predicted fringe frequencies and weights per amplitude\n");
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("# columns: amplitude,k1,k2,k3,k2_alt,b0,b1,b2,b3\n");
    for i in 0..arcs.amplitudes.len() {
        let cells = [
            arcs.amplitudes[i],
            arcs.k1[i],
            arcs.k2[i],
            arcs.k3[i],
            arcs.k2_alt[i],
            arcs.b0[i],
            arcs.b1[i],
            arcs.b2[i],
            arcs.b3[i],
        ];
        let _ = writeln!(out, "{}", join(cells));
    }
    write_file(path, &out)
}

pub fn write_ridges(path: &Path, ridges: &[RidgePoint], provenance: &[String]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("# spectral peaks per amplitude column\n");
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("# columns: amplitude,k_rad_ns,magnitude\n");
    for r in ridges {
        let _ = writeln!(out, "{}", join([r.amplitude, r.k, r.magnitude]));
    }
    write_file(path, &out)
}

pub fn write_report(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut out = String::new();
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    write_file(path, &out)
}

/// Binary 8-bit graymap of a pattern, min-max normalized; a constant grid
/// maps to a single gray level. Rows follow the amplitude axis.
pub fn write_pgm(path: &Path, grid: &PatternGrid) -> Result<(), CliError> {
    let values = grid.values();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    let mut bytes = Vec::with_capacity(64 + values.len());
    bytes.extend_from_slice(format!("P5\n{} {}\n255\n", values.ncols(), values.nrows()).as_bytes());
    for &v in values.iter() {
        let level = if span == 0.0 { 0.0 } else { (v - lo) / span * 255.0 };
        bytes.push(level.round() as u8);
    }
    fs::write(path, bytes).map_err(CliError::io(path))
}
