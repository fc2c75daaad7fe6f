//! File formats: 16-bit binary PGM rasters with a JSON sidecar, CSV tables
//! and SVG figures. All writers are deterministic byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frostman::{CircleMeasure, StepMeasure1D};
use crate::geometry::{Direction, GridSpec, Point};
use crate::testsets::{RasterSet, SetRecipe};
use crate::tube_measures::TubeRectMeasure;

const MAXVAL: u32 = 65535;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterSidecar {
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<SetRecipe>,
    /// SHA-256 of the PGM bytes.
    pub sha256: String,
}

pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// PGM bytes: the first image row is the top of the grid (largest `y`).
pub fn encode_pgm(r: &RasterSet) -> Vec<u8> {
    let n = r.grid.cells_per_side;
    let mut out = format!("P5\n{n} {n}\n{MAXVAL}\n").into_bytes();
    out.reserve(2 * n * n);
    for row in (0..n).rev() {
        for ix in 0..n {
            let v = (r.get(ix, row) * MAXVAL as f64).round() as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}

pub fn write_raster(path: &Path, r: &RasterSet, recipe: Option<&SetRecipe>) -> Result<()> {
    let bytes = encode_pgm(r);
    let sidecar = RasterSidecar { grid: r.grid, recipe: recipe.cloned(), sha256: sha256_hex(&bytes) };
    write_bytes(path, &bytes)?;
    write_bytes(&sidecar_path(path), to_json(&sidecar).as_bytes())
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

/// Decodes a square binary PGM (8 or 16 bit) onto the given grid.
pub fn decode_pgm(path: &Path, bytes: &[u8], grid: GridSpec) -> Result<RasterSet> {
    let bad = |reason: &str| Error::malformed(path, reason);
    let mut pos = 0;
    if next_token(bytes, &mut pos) != Some(b"P5") {
        return Err(bad("not a binary PGM (expected P5 magic)"));
    }
    let mut num = |what: &str| -> Result<u32> {
        next_token(bytes, &mut pos)
            .and_then(|t| std::str::from_utf8(t).ok())
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(&format!("missing or invalid {what}")))
    };
    let (w, h, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if w != h || w as usize != grid.cells_per_side {
        return Err(bad(&format!("image is {w}x{h}, sidecar grid has {} cells per side", grid.cells_per_side)));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval must lie in 1..=65535"));
    }
    pos += 1;
    let n = w as usize;
    let wide = maxval > 255;
    let need = n * n * if wide { 2 } else { 1 };
    if bytes.len() < pos + need {
        return Err(bad("pixel data is truncated"));
    }
    let data = &bytes[pos..pos + need];
    let mut coverage = vec![0.0; n * n];
    for row in 0..n {
        let iy = n - 1 - row;
        for ix in 0..n {
            let k = row * n + ix;
            let v = if wide { u16::from_be_bytes([data[2 * k], data[2 * k + 1]]) as u32 } else { data[k] as u32 };
            if v > maxval {
                return Err(bad("pixel value exceeds maxval"));
            }
            coverage[iy * n + ix] = v as f64 / maxval as f64;
        }
    }
    RasterSet::from_coverage(grid, coverage)
}

pub fn read_raster(path: &Path) -> Result<RasterSet> {
    let bytes = read_bytes(path)?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: RasterSidecar = serde_json::from_str(&text).map_err(|e| Error::malformed(&side, e.to_string()))?;
    if sidecar.sha256 != sha256_hex(&bytes) {
        return Err(Error::malformed(path, "checksum does not match the sidecar"));
    }
    decode_pgm(path, &bytes, sidecar.grid)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// CSV of one or more tube measures: `angle,delta,s,j,offset,weight`.
pub fn tube_measures_csv(measures: &[TubeRectMeasure]) -> String {
    let mut out = String::from("angle,delta,s,j,offset,weight\n");
    for mu in measures {
        for (j, offset, w) in mu.entries() {
            let _ = writeln!(
                out,
                "{},{},{},{j},{},{}",
                fmt_f64(mu.direction().angle()),
                fmt_f64(mu.delta()),
                fmt_f64(mu.s()),
                fmt_f64(offset),
                fmt_f64(w)
            );
        }
    }
    out
}

fn parse_csv(path: &Path, text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found: Vec<String> =
        reader.headers().map_err(|e| Error::malformed(path, e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();
    if found != header {
        return Err(Error::malformed(path, format!("expected columns {}, found {}", header.join(","), found.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::malformed(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::malformed(path, format!("row {}: {e}", i + 2)))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads measures written by [`tube_measures_csv`], grouped by
/// `(angle, delta, s)` in order of first appearance.
pub fn read_tube_measures(path: &Path) -> Result<Vec<TubeRectMeasure>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_csv(path, &text, &["angle", "delta", "s", "j", "offset", "weight"])?;
    let mut groups: Vec<((u64, u64, u64), Vec<(i64, f64, f64)>)> = Vec::new();
    for r in rows {
        if r[3].fract() != 0.0 {
            return Err(Error::malformed(path, format!("tube index {} is not an integer", r[3])));
        }
        let key = (r[0].to_bits(), r[1].to_bits(), r[2].to_bits());
        let entry = (r[3] as i64, r[4], r[5]);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(entry),
            None => groups.push((key, vec![entry])),
        }
    }
    groups
        .into_iter()
        .map(|((a, d, s), entries)| {
            TubeRectMeasure::new(
                Direction::from_angle(f64::from_bits(a)),
                f64::from_bits(d),
                f64::from_bits(s),
                entries,
            )
            .map_err(|e| Error::malformed(path, e.to_string()))
        })
        .collect()
}

/// `index,mass` for every stored cell.
pub fn step_measure_csv(mu: &StepMeasure1D) -> String {
    let mut out = String::from("index,mass\n");
    for (i, w) in mu.weights().iter().enumerate() {
        let _ = writeln!(out, "{},{}", mu.lo() + i as i64, fmt_f64(*w));
    }
    out
}

pub fn circle_measure_csv(sigma: &CircleMeasure) -> String {
    let mut out = String::from("index,mass\n");
    for (i, w) in sigma.masses().iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_f64(*w));
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Raster as SVG: one path group, one path per grey level, viewBox equal to
/// the grid in cell units.
pub fn render_raster_svg(r: &RasterSet) -> String {
    const LEVELS: usize = 16;
    let n = r.grid.cells_per_side;
    let mut paths = vec![String::new(); LEVELS];
    for row in 0..n {
        let iy = n - 1 - row;
        let mut ix = 0;
        while ix < n {
            let level = (r.get(ix, iy) * LEVELS as f64).ceil().min(LEVELS as f64) as usize;
            let mut end = ix + 1;
            while end < n && (r.get(end, iy) * LEVELS as f64).ceil().min(LEVELS as f64) as usize == level {
                end += 1;
            }
            if level > 0 {
                let _ = write!(paths[level - 1], "M{ix} {row}h{}v1h-{}z", end - ix, end - ix);
            }
            ix = end;
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {n} {n}" width="512" height="512" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{n}" height="{n}" fill="white"/>"#);
    out.push_str("<g id=\"raster\" stroke=\"none\">\n");
    for (k, d) in paths.iter().enumerate() {
        if d.is_empty() {
            continue;
        }
        let grey = 255 - (255 * (k + 1) / LEVELS);
        let _ = writeln!(out, r#"<path fill="rgb({grey},{grey},{grey})" d="{d}"/>"#);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Overlay of tube measures: each rectangle filled with opacity scaled by
/// its weight, its tube outlined, over a pair of axes.
pub fn render_measures_svg(measures: &[TubeRectMeasure]) -> String {
    let mut lo = Point::new(-0.5, -0.5);
    let mut hi = Point::new(1.5, 1.5);
    for mu in measures {
        for (r, _) in mu.rects() {
            for c in r.corners() {
                lo = Point::new(lo.x.min(c.x), lo.y.min(c.y));
                hi = Point::new(hi.x.max(c.x), hi.y.max(c.y));
            }
        }
    }
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    // flip y so the figure reads with y up
    let p = |q: Point| format!("{},{}", num(q.x), num(lo.y + hi.y - q.y));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="512" height="512">"#,
        num(lo.x),
        num(lo.y),
        num(w),
        num(h)
    );
    let stroke = num(w.max(h) / 400.0);
    out.push_str("<g id=\"axes\" stroke=\"black\" fill=\"none\">\n");
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="{stroke}"/>"#,
        num(lo.x),
        num(lo.y + hi.y),
        num(hi.x),
        num(lo.y + hi.y)
    );
    let _ = writeln!(out, r#"<line x1="0" y1="{}" x2="0" y2="{}" stroke-width="{stroke}"/>"#, num(lo.y), num(hi.y));
    out.push_str("</g>\n");
    for (k, mu) in measures.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let max_w = mu.entries().map(|e| e.2).fold(0.0, f64::max);
        let _ = writeln!(out, r#"<g id="measure-{k}" stroke="{color}" fill="{color}">"#);
        for (r, weight) in mu.rects() {
            let c = r.corners();
            let pts: Vec<String> = c.iter().map(|&q| p(q)).collect();
            let alpha = if max_w > 0.0 { 0.15 + 0.6 * weight / max_w } else { 0.0 };
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill-opacity="{}" stroke-width="{stroke}"/>"#,
                pts.join(" "),
                num(alpha)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// A line chart of `(x, y)` series on a unit box, for trend figures.
pub fn render_series_svg(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0, 1.0, 0.0, 1.0);
    if !pts.is_empty() {
        x0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).min(0.0);
        y1 = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
    }
    let sx = |x: f64| 60.0 + 420.0 * (x - x0) / (x1 - x0);
    let sy = |y: f64| 440.0 - 400.0 * (y - y0) / (y1 - y0);
    let mut out = String::new();
    out.push_str(r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 500 500" width="500" height="500">"#);
    out.push('\n');
    let _ = writeln!(out, r#"<text x="250" y="20" text-anchor="middle" font-size="14">{}</text>"#, escape(title));
    out.push_str("<g id=\"axes\" stroke=\"black\">\n<line x1=\"60\" y1=\"440\" x2=\"480\" y2=\"440\"/>\n<line x1=\"60\" y1=\"40\" x2=\"60\" y2=\"440\"/>\n</g>\n");
    let _ = writeln!(out, r#"<text x="270" y="480" text-anchor="middle" font-size="12">{}</text>"#, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="15" y="240" text-anchor="middle" font-size="12" transform="rotate(-90 15 240)">{}</text>"#,
        escape(y_label)
    );
    let _ = writeln!(out, r#"<text x="60" y="455" font-size="10" text-anchor="middle">{}</text>"#, num(x0));
    let _ = writeln!(out, r#"<text x="480" y="455" font-size="10" text-anchor="middle">{}</text>"#, num(x1));
    let _ = writeln!(out, r#"<text x="55" y="444" font-size="10" text-anchor="end">{}</text>"#, num(y0));
    let _ = writeln!(out, r#"<text x="55" y="44" font-size="10" text-anchor="end">{}</text>"#, num(y1));
    for (k, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let d: Vec<String> = s
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{},{}", num(sx(x)), num(sy(y))))
            .collect();
        let _ = writeln!(out, r#"<g id="series-{k}" stroke="{color}" fill="{color}">"#);
        if !d.is_empty() {
            let _ = writeln!(out, r#"<polyline points="{}" fill="none"/>"#, d.join(" "));
            for q in &d {
                let (x, y) = q.split_once(',').unwrap();
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3"/>"#);
            }
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11" stroke="none">{}</text>"#, 70, 55 + 15 * k, escape(name));
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Heat strip: one row per scale, one column per direction, grey level by
/// value on `[0, max]`.
pub fn render_heat_strip_svg(title: &str, rows: &[(String, Vec<f64>)]) -> String {
    let cols = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(1);
    let max = rows.iter().flat_map(|r| r.1.iter().copied()).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let cell_w = 420.0 / cols as f64;
    let height = 60 + 24 * rows.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 500 {height}" width="500" height="{height}" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(out, r#"<text x="250" y="20" text-anchor="middle" font-size="14">{}</text>"#, escape(title));
    for (k, (label, values)) in rows.iter().enumerate() {
        let y = 40 + 24 * k;
        let _ = writeln!(out, r#"<g id="strip-{k}">"#);
        let _ = writeln!(out, r#"<text x="72" y="{}" font-size="10" text-anchor="end">{}</text>"#, y + 14, escape(label));
        for (i, v) in values.iter().enumerate() {
            let frac = if max > 0.0 && v.is_finite() { (v / max).clamp(0.0, 1.0) } else { 0.0 };
            let grey = (255.0 * (1.0 - frac)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{y}" width="{}" height="20" fill="rgb({grey},{grey},{grey})"/>"#,
                num(76.0 + cell_w * i as f64),
                num(cell_w)
            );
        }
        out.push_str("</g>\n");
    }
    let _ = writeln!(out, r#"<text x="76" y="{}" font-size="10">0</text>"#, height - 6);
    let _ = writeln!(out, r#"<text x="496" y="{}" font-size="10" text-anchor="end">pi</text>"#, height - 6);
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
