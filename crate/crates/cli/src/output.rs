use std::fmt::Write;

/// Up to ten decimals, trailing zeros dropped: `4.0000000000002` prints as `4`.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// A polygon drawn as one closed polyline.
pub struct Polygon {
    pub points: Vec<[f64; 2]>,
    pub stroke: &'static str,
    pub label: String,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// SVG document with one `<polyline>` per polygon. `disk` draws the unit
/// circle and frames the view on it.
pub fn svg(polygons: &[Polygon], disk: bool) -> String {
    let all = polygons.iter().flat_map(|p| p.points.iter());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if disk || !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let cx = 0.5 * (lo[0] + hi[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    // y grows downwards in SVG.
    let map = |p: &[f64; 2]| {
        (
            SIZE / 2.0 + (p[0] - cx) * scale,
            SIZE / 2.0 - (p[1] - cy) * scale,
        )
    };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(out, r#"  <rect width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    if disk {
        let (x, y) = map(&[0.0, 0.0]);
        writeln!(
            out,
            r#"  <circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="gray"/>"#,
            scale
        )
        .unwrap();
    }
    for poly in polygons {
        let mut pts: Vec<String> = poly
            .points
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        if let Some(first) = pts.first().cloned() {
            pts.push(first);
        }
        writeln!(out, "  <!-- {} -->", escape(&poly.label)).unwrap();
        writeln!(
            out,
            r#"  <polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            poly.stroke
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace("--", "- -")
}
