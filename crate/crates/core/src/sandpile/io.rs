//! Grid text format.
//!
//! ```text
//! d gamma s_1 ... s_d
//! # origin l_1 ... l_d        (optional; default l_i = -floor(s_i / 2))
//! <s_1 * ... * s_{d-1} rows of s_d integers, last axis along each row>
//! ```
//! Blank lines and other `#` lines are ignored.

use std::fmt::Write;

use super::{HeightConfig, Odometer, SandpileError};
use crate::window::BoxWindow;

fn format_err(line: usize, message: impl Into<String>) -> SandpileError {
    SandpileError::Format { line, message: message.into() }
}

fn ints<T: std::str::FromStr>(line_no: usize, s: &str) -> Result<Vec<T>, SandpileError> {
    s.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| format_err(line_no, format!("bad integer `{t}`"))))
        .collect()
}

pub fn parse_grid(src: &str) -> Result<HeightConfig, SandpileError> {
    let mut lines = src.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| format_err(1, "empty grid file"))?;
    let header: Vec<i64> = ints(hl, header)?;
    if header.len() < 3 {
        return Err(format_err(hl, "header must be `d gamma s_1 ... s_d`"));
    }
    let dim = usize::try_from(header[0]).map_err(|_| format_err(hl, "negative dimension"))?;
    let gamma = header[1];
    if header.len() != dim + 2 {
        return Err(format_err(hl, format!("expected {dim} extents, found {}", header.len() - 2)));
    }
    let size: Vec<usize> = header[2..]
        .iter()
        .map(|&s| usize::try_from(s).map_err(|_| format_err(hl, "negative extent")))
        .collect::<Result<_, _>>()?;
    let mut lo: Vec<i64> = size.iter().map(|&s| -((s / 2) as i64)).collect();
    let mut heights = Vec::new();
    let row_len = *size.last().unwrap_or(&0);
    let mut rows = 0usize;
    for (ln, line) in lines {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(o) = rest.trim().strip_prefix("origin") {
                if rows > 0 {
                    return Err(format_err(ln, "origin must precede the rows"));
                }
                lo = ints(ln, o)?;
                if lo.len() != dim {
                    return Err(format_err(ln, format!("origin needs {dim} coordinates")));
                }
            }
            continue;
        }
        let row: Vec<i64> = ints(ln, line)?;
        if row.len() != row_len {
            return Err(format_err(ln, format!("expected {row_len} values, found {}", row.len())));
        }
        heights.extend(row);
        rows += 1;
    }
    let window = BoxWindow::new(lo, size).map_err(|e| format_err(hl, e.to_string()))?;
    if heights.len() != window.len() {
        return Err(format_err(
            src.lines().count(),
            format!("expected {} rows, found {rows}", window.len() / row_len.max(1)),
        ));
    }
    HeightConfig::new(window, gamma, heights).map_err(|e| format_err(hl, e.to_string()))
}

pub fn write_grid(v: &HeightConfig) -> String {
    let w = v.window();
    let mut out = format!("{} {}", v.dim(), v.gamma());
    for s in w.size() {
        let _ = write!(out, " {s}");
    }
    out.push_str("\n# origin");
    for l in w.lo() {
        let _ = write!(out, " {l}");
    }
    out.push('\n');
    let row_len = *w.size().last().unwrap();
    for row in v.heights().chunks(row_len.max(1)) {
        let cells: Vec<String> = row.iter().map(|h| h.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// CSV rows `n_1,...,n_d,count`.
pub fn odometer_csv(odo: &Odometer) -> String {
    let d = odo.window.dim();
    let mut out = String::new();
    let cols: Vec<String> = (1..=d).map(|i| format!("n{i}")).collect();
    let _ = writeln!(out, "{},count", cols.join(","));
    for (n, c) in odo.window.sites().zip(&odo.counts) {
        let coords: Vec<String> = n.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{},{c}", coords.join(","));
    }
    let _ = writeln!(out, "# total_mass_lost={}", odo.total_mass_lost);
    out
}
