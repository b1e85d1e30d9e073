//! On-disk formats: snapshot CSVs, snapshot manifests, sweep reports and
//! SVG line plots. Every file is written whole to a temporary file in the
//! destination directory and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ConvergenceReport;
use crate::grid::{Field, Grid1D};

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Full-precision literal: 17 significant digits, round-trips exactly.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn snapshot_csv(field: &Field) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in field.grid().points().zip(field.values()) {
        let _ = writeln!(out, "{},{}", num(x), num(*v));
    }
    out
}

/// Writes a snapshot as `x,value` rows.
pub fn write_snapshot(field: &Field, path: &Path) -> Result<()> {
    write_atomic(path, &snapshot_csv(field))
}

fn bad_csv(path: &Path, line: usize, what: &str) -> Error {
    Error::io(
        path,
        std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {line}: {what}")),
    )
}

/// Reads a snapshot written by [`write_snapshot`] back onto `grid`.
pub fn read_snapshot(path: &Path, grid: Grid1D) -> Result<Field> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("x,value") {
        return Err(bad_csv(path, 1, "missing `x,value` header"));
    }
    let mut values = Vec::with_capacity(grid.nx());
    for (i, line) in lines.enumerate() {
        let (x, v) = line.split_once(',').ok_or_else(|| bad_csv(path, i + 2, "expected two columns"))?;
        let x: f64 = x.parse().map_err(|_| bad_csv(path, i + 2, "bad x"))?;
        let v: f64 = v.parse().map_err(|_| bad_csv(path, i + 2, "bad value"))?;
        if i >= grid.nx() || (x - grid.x(i)).abs() > 1e-9 * grid.dx() {
            return Err(bad_csv(path, i + 2, "point does not match the grid"));
        }
        values.push(v);
    }
    Field::new(grid, values)
}

/// `time,filename` rows for a directory of snapshots.
pub fn manifest_csv(entries: &[(f64, String)]) -> String {
    let mut out = String::from("time,filename\n");
    for (t, name) in entries {
        let _ = writeln!(out, "{},{}", num(*t), name);
    }
    out
}

pub fn report_csv(report: &ConvergenceReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), num);
    let mut out = String::from("epsilon,err_p,err_m,speed,limit_speed\n");
    for i in 0..report.epsilons.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(report.epsilons[i]),
            num(report.err_p[i]),
            num(report.err_m[i]),
            opt(report.speeds[i]),
            opt(report.limit_speed)
        );
    }
    out
}

pub fn write_report(report: &ConvergenceReport, path: &Path) -> Result<()> {
    write_atomic(path, &report_csv(report))
}

/// Line plot of `(time, field)` snapshots over the domain, one polyline per
/// snapshot, labelled with its time.
pub fn snapshots_svg(series: &[(f64, Field)], title: &str) -> String {
    let lines: Vec<_> = series
        .iter()
        .map(|(t, f)| {
            let pts = f.grid().points().zip(f.values().iter().copied()).collect();
            (format!("t = {t}"), pts)
        })
        .collect();
    lines_svg(&lines, title, "x")
}

/// `err_p` and `err_m` against `ε`.
pub fn errors_svg(report: &ConvergenceReport) -> String {
    let pts = |v: &[f64]| report.epsilons.iter().copied().zip(v.iter().copied()).collect();
    let lines = vec![("err_p".to_string(), pts(&report.err_p)), ("err_m".to_string(), pts(&report.err_m))];
    lines_svg(&lines, "space-time errors", "epsilon")
}

type Line = (String, Vec<(f64, f64)>);

fn lines_svg(lines: &[Line], title: &str, xlabel: &str) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const M: f64 = 50.0;
    const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let all = lines.iter().flat_map(|(_, pts)| pts.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 1e-12f64);
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        out.push_str("</svg>\n");
        return out;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let _ = writeln!(
        out,
        r#"<path d="M{M} {} H{} M{M} {} V{}" stroke="black" fill="none"/>"#,
        H - M,
        W - M,
        H - M,
        M
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{x}</text>"#, sx(x), H - M + 16.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - M + 32.0, escape(xlabel));
    for y in [y0, y1] {
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.3}</text>"#, M - 4.0, sy(y) + 4.0);
    }
    for (k, (label, pts)) in lines.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if i == 0 { "M" } else { " L" }, sx(*x), sy(*y));
        }
        let _ = writeln!(out, r#"<path d="{d}" stroke="{colour}" fill="none" stroke-width="1.5"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            W - M - 80.0,
            M + 14.0 * (k as f64 + 1.0),
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(svg: &str, path: &Path) -> Result<()> {
    write_atomic(path, svg)
}
