//! Minimal SVG rendering of `taylor` and `envelope --check` CSV output.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

struct Series {
    label: &'static str,
    color: &'static str,
    line: bool,
    pts: Vec<(f64, f64)>,
}

fn column(header: &csv::StringRecord, name: &str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

fn num(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Parse a decimal or `p/q` string as produced by the CSV writers.
fn coord(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => Some(num(p)? / num(q)?),
        None => num(s),
    }
}

pub fn render(path: &Path) -> Result<String, CliError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
    let (title, xlabel, ylabel, series) = if let (Some(n), Some(r), Some(f)) =
        (column(&header, "n"), column(&header, "log10_root"), column(&header, "log10_floor"))
    {
        let mut root = Series { label: "log10 root", color: "#1f77b4", line: false, pts: Vec::new() };
        let mut floor = Series { label: "log10 floor", color: "#d62728", line: true, pts: Vec::new() };
        for row in &rows {
            let Some(x) = num(&row[n]) else { continue };
            if let Some(y) = num(&row[r]) {
                root.pts.push((x, y));
            }
            if let Some(y) = num(&row[f]) {
                floor.pts.push((x, y));
            }
        }
        ("Taylor coefficient roots", "order n", "log10", vec![root, floor])
    } else if let (Some(xc), Some(rc), Some(vc)) =
        (column(&header, "x"), column(&header, "ln_ratio_upper"), column(&header, "verdict"))
    {
        let mut pass = Series { label: "pass", color: "#2ca02c", line: false, pts: Vec::new() };
        let mut other = Series { label: "fail/inconclusive", color: "#d62728", line: false, pts: Vec::new() };
        for row in &rows {
            let (Some(x), Some(y)) = (coord(&row[xc]), num(&row[rc])) else { continue };
            if &row[vc] == "pass" { pass.pts.push((x, y)) } else { other.pts.push((x, y)) }
        }
        ("Envelope log ratio", "x", "ln |w| - A2 |x|^(1+1/eps)", vec![pass, other])
    } else {
        return Err(CliError::Usage(format!("{}: not a taylor or envelope CSV", path.display())));
    };
    Ok(svg(title, xlabel, ylabel, &series))
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let all = series.iter().flat_map(|s| s.pts.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    (x0, x1, y0, y1)
}

fn svg(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, esc(xlabel));
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, H / 2.0, H / 2.0, esc(ylabel));
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="{anchor}">{}</text>"#, sx(v), H - PAD + 15.0, tick(v));
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, PAD - 4.0, sy(v) + 4.0, tick(v));
    }
    for (i, ser) in series.iter().enumerate() {
        if ser.line && ser.pts.len() > 1 {
            let d: Vec<String> = ser.pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{}"/>"#, d.join(" "), ser.color);
        } else {
            for &(x, y) in &ser.pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, sx(x), sy(y), ser.color);
            }
        }
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, W - PAD - 130.0, ly, ser.color);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - PAD - 115.0, ly + 9.0, esc(ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) { format!("{v:.2e}") } else { format!("{v:.3}") }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coord_reads_fractions() {
        assert_eq!(coord("-3/4"), Some(-0.75));
        assert_eq!(coord("2"), Some(2.0));
        assert_eq!(coord("-inf"), None);
    }

    #[test]
    fn bounds_widen_degenerate_ranges() {
        let s = [Series { label: "a", color: "red", line: false, pts: vec![(1.0, 2.0)] }];
        assert_eq!(bounds(&s), (1.0, 2.0, 2.0, 3.0));
    }
}
