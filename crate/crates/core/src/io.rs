//! Flat-file formats: point sets, Fourier states, box functions and τ-histograms.
//!
//! Blank lines and lines starting with `#` are skipped everywhere. A first
//! line whose leading field is not numeric is taken as a CSV header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::parallelogram::{PointSet, TauHistogram};
use crate::schrodinger::FourierState;
use crate::uniformity::BoxFunction;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Numbered data lines, with comments, blanks and an optional header removed.
fn data_lines(text: &str, header: bool) -> impl Iterator<Item = (usize, &str)> {
    let mut first = true;
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let was_first = std::mem::replace(&mut first, false);
        if header && was_first {
            let lead = line.split(',').next().unwrap_or("").trim();
            if lead.parse::<f64>().is_err() {
                return None;
            }
        }
        Some((i + 1, line))
    })
}

fn int_field(line: usize, s: &str) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| parse_err(line, format!("expected an integer, found {s:?}")))
}

fn real_field(line: usize, s: &str) -> Result<f64> {
    let v = s
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, found {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

fn point(line: usize, x: i64, y: i64) -> Result<LatticePoint> {
    LatticePoint::new(x, y).map_err(|e| parse_err(line, e.to_string()))
}

/// One point per line: two whitespace-separated integers.
pub fn parse_point_set(text: &str) -> Result<PointSet> {
    let mut pts = Vec::new();
    for (n, line) in data_lines(text, false) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(n, format!("expected 2 integers, found {} fields", fields.len())));
        }
        pts.push(point(n, int_field(n, fields[0])?, int_field(n, fields[1])?)?);
    }
    Ok(PointSet::new(pts))
}

pub fn format_point_set(s: &PointSet) -> String {
    let mut out = String::new();
    for p in s.points() {
        let _ = writeln!(out, "{} {}", p.x, p.y);
    }
    out
}

/// Lines `xi1,xi2,re,im`; repeated modes are summed.
pub fn parse_fourier_state(text: &str) -> Result<FourierState> {
    let mut coeffs: BTreeMap<LatticePoint, Complex64> = BTreeMap::new();
    for (n, line) in data_lines(text, true) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(parse_err(n, format!("expected xi1,xi2,re,im; found {} fields", f.len())));
        }
        let p = point(n, int_field(n, f[0])?, int_field(n, f[1])?)?;
        let c = Complex64::new(real_field(n, f[2])?, real_field(n, f[3])?);
        *coeffs.entry(p).or_default() += c;
    }
    FourierState::new(coeffs)
}

pub fn format_fourier_state(u: &FourierState) -> String {
    let mut out = String::from("xi1,xi2,re,im\n");
    for (p, c) in u.coeffs() {
        let _ = writeln!(out, "{},{},{:e},{:e}", p.x, p.y, c.re, c.im);
    }
    out
}

/// Lines `i,re,im` (1D) or `i,j,re,im` (2D) on [−N, N]^d; N is the largest |index|
/// and unlisted entries are zero.
pub fn parse_box_function(text: &str) -> Result<BoxFunction> {
    let mut entries: Vec<(usize, Vec<i64>, Complex64)> = Vec::new();
    let mut dim = None;
    for (n, line) in data_lines(text, true) {
        let f: Vec<&str> = line.split(',').collect();
        let d = match f.len() {
            3 => 1,
            4 => 2,
            k => return Err(parse_err(n, format!("expected 3 or 4 fields, found {k}"))),
        };
        if *dim.get_or_insert(d) != d {
            return Err(parse_err(n, "rows mix 1D and 2D indices"));
        }
        let idx = f[..d].iter().map(|s| int_field(n, s)).collect::<Result<Vec<_>>>()?;
        let c = Complex64::new(real_field(n, f[d])?, real_field(n, f[d + 1])?);
        entries.push((n, idx, c));
    }
    let d = dim.ok_or_else(|| parse_err(0, "no data rows"))?;
    let half = entries
        .iter()
        .flat_map(|(_, idx, _)| idx.iter().map(|v| v.abs()))
        .max()
        .unwrap_or(0);
    let mut f = BoxFunction::zeros(d, half)?;
    let side = (2 * half + 1) as usize;
    let mut values = f.values().to_vec();
    for (_, idx, c) in entries {
        let mut off = 0usize;
        for v in idx {
            off = off * side + (v + half) as usize;
        }
        values[off] += c;
    }
    f = BoxFunction::new(d, half, values)?;
    Ok(f)
}

pub fn format_box_function(f: &BoxFunction) -> String {
    let mut out = String::from(if f.dim() == 1 { "i,re,im\n" } else { "i,j,re,im\n" });
    for (p, c) in f.coords().iter().zip(f.values()) {
        if f.dim() == 1 {
            let _ = writeln!(out, "{},{:e},{:e}", p[0], c.re, c.im);
        } else {
            let _ = writeln!(out, "{},{},{:e},{:e}", p[0], p[1], c.re, c.im);
        }
    }
    out
}

/// Columns `tau,count_or_real,imag`, optionally restricted to |τ| ≤ max_tau.
pub fn format_histogram(h: &TauHistogram, max_tau: Option<i64>) -> String {
    let mut out = String::from("tau,count_or_real,imag\n");
    for (&tau, w) in &h.entries {
        if max_tau.is_some_and(|m| tau.abs() > m) {
            continue;
        }
        if h.unit_weights {
            let _ = writeln!(out, "{tau},{},0", w.re.round() as i64);
        } else {
            let _ = writeln!(out, "{tau},{:e},{:e}", w.re, w.im);
        }
    }
    out
}

/// Histogram rows `(τ, re, im)` read back from [`format_histogram`] output.
pub fn parse_histogram(text: &str) -> Result<Vec<(i64, Complex64)>> {
    let mut out = Vec::new();
    for (n, line) in data_lines(text, true) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(n, format!("expected tau,count_or_real,imag; found {} fields", f.len())));
        }
        out.push((int_field(n, f[0])?, Complex64::new(real_field(n, f[1])?, real_field(n, f[2])?)));
    }
    Ok(out)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// CSV table from a header and numeric rows.
pub fn format_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
