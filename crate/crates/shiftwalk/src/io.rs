//! CSV and JSON artifacts.
//!
//! Floats are written in their shortest round-trip form, so equal inputs give
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use shiftwalk_core::transfer::PiecewiseConstantDensity;
use shiftwalk_core::walk::WalkRecord;

use crate::error::{RunError, RunResult};

/// Writes a trajectory as `step,position,fractional,cocycle`.
pub fn write_walk_csv<W: Write>(w: W, rec: &WalkRecord) -> RunResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "position", "fractional", "cocycle"])?;
    for (k, ((p, x), m)) in rec.positions.iter().zip(&rec.fractional).zip(&rec.cocycle).enumerate() {
        out.write_record([k.to_string(), p.to_string(), x.to_string(), m.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a density as `break,value` rows; the final row holds the right end with an empty value.
pub fn write_density_csv<W: Write>(w: W, d: &PiecewiseConstantDensity) -> RunResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["break", "value"])?;
    for (b, v) in d.breaks().iter().zip(d.values()) {
        out.write_record([b.to_string(), v.to_string()])?;
    }
    out.write_record([d.breaks()[d.cells()].to_string(), String::new()])?;
    out.flush()?;
    Ok(())
}

/// Largest deviation from unit mass accepted when reading a density.
pub const MASS_TOL: f64 = 1e-9;

/// Reads a density written by [`write_density_csv`]; values are kept exactly.
pub fn read_density_csv<R: Read>(r: R) -> RunResult<PiecewiseConstantDensity> {
    let mut input = csv::Reader::from_reader(r);
    let (mut breaks, mut values) = (Vec::new(), Vec::new());
    for row in input.records() {
        let row = row?;
        let parse = |s: &str| s.parse::<f64>().map_err(|_| RunError::Config(format!("bad number `{s}` in density file")));
        breaks.push(parse(&row[0])?);
        if !row[1].is_empty() {
            values.push(parse(&row[1])?);
        }
    }
    Ok(PiecewiseConstantDensity::from_normalized(breaks, values, MASS_TOL)?)
}

/// Writes conjugacy knots as `u,h_u,h_u_minus_u`.
pub fn write_knots_csv<W: Write>(w: W, knots: &[(f64, f64)]) -> RunResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["u", "h_u", "h_u_minus_u"])?;
    for (u, h) in knots {
        out.write_record([u.to_string(), h.to_string(), (h - u).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes rescaled path values as `path,t,value`.
pub fn write_paths_csv<W: Write>(w: W, t: &[f64], paths: &[Vec<f64>]) -> RunResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["path", "t", "value"])?;
    for (i, v) in paths.iter().enumerate() {
        for (t, x) in t.iter().zip(v) {
            out.write_record([i.to_string(), t.to_string(), x.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> RunResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes pretty JSON to a file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> RunResult<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

/// Creates a buffered file, making parent directories as needed.
pub fn create(path: &Path) -> RunResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}
