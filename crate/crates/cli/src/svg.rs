//! Minimal self-contained SVG renderings of simplex scatters and PR curves.
//! Coordinates are printed with three decimals so output is stable.

use std::fmt::Write;

use tg_core::evaluation::PrPoint;
use tg_core::simplex::{SimplexPoint, VERTICES};

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;

fn header(out: &mut String, width: f64, height: f64, comment: &str, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, "<!-- {} -->", escape(&comment.replace("--", "- -")));
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn simplex_px(x: f64, y: f64) -> (f64, f64) {
    let side = SIZE - 2.0 * MARGIN;
    (MARGIN + x * side, SIZE - MARGIN - y * side)
}

/// Triangle outline, corner labels and one marker per point (jittered
/// position when present).
pub fn simplex(points: &[SimplexPoint], title: &str, comment: &str) -> String {
    let mut out = String::new();
    header(&mut out, SIZE, SIZE, comment, title);
    let corners: Vec<String> = VERTICES
        .iter()
        .map(|&(x, y)| {
            let (px, py) = simplex_px(x, y);
            format!("{px:.3},{py:.3}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polygon id="triangle" points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        corners.join(" ")
    );
    for ((x, y), (label, dx, dy)) in VERTICES
        .iter()
        .zip([("No", -12.0, 16.0), ("Problematic", -30.0, 16.0), ("Abusive", -22.0, -8.0)])
    {
        let (px, py) = simplex_px(*x, *y);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{label}</text>"#,
            px + dx,
            py + dy
        );
    }
    let _ = writeln!(out, r#"<g id="points" fill="steelblue" fill-opacity="0.5">"#);
    for p in points {
        let (x, y) = p.jittered.unwrap_or((p.x, p.y));
        let (px, py) = simplex_px(x, y);
        let _ = writeln!(out, r#"<circle cx="{px:.3}" cy="{py:.3}" r="2"/>"#);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Precision against recall on the unit square, as a step line with one
/// marker per point.
pub fn pr_curve(points: &[PrPoint], title: &str, comment: &str) -> String {
    let mut out = String::new();
    header(&mut out, SIZE, SIZE, comment, title);
    let side = SIZE - 2.0 * MARGIN;
    let px = |r: f64, p: f64| (MARGIN + r * side, SIZE - MARGIN - p * side);
    let _ = writeln!(
        out,
        r#"<rect id="axes" x="{MARGIN:.3}" y="{MARGIN:.3}" width="{side:.3}" height="{side:.3}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for t in [0.0, 0.5, 1.0] {
        let (x, y0) = px(t, 0.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10">{t:.1}</text>"#,
            x - 6.0,
            y0 + 14.0
        );
        let (x0, y) = px(0.0, t);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10">{t:.1}</text>"#,
            x0 - 24.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">Recall</text>"#,
        SIZE / 2.0 - 18.0,
        SIZE - 8.0
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{:.3}" font-family="sans-serif" font-size="12" transform="rotate(-90 12 {:.3})">Precision</text>"#,
        SIZE / 2.0 + 24.0,
        SIZE / 2.0 + 24.0
    );
    if !points.is_empty() {
        let mut path = Vec::with_capacity(2 * points.len());
        let mut prev_r = 0.0;
        for p in points {
            let (x0, y) = px(prev_r, p.precision);
            let (x1, _) = px(p.recall, p.precision);
            path.push(format!("{x0:.3},{y:.3}"));
            path.push(format!("{x1:.3},{y:.3}"));
            prev_r = p.recall;
        }
        let _ = writeln!(
            out,
            r#"<polyline id="curve" points="{}" fill="none" stroke="firebrick" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        let _ = writeln!(out, r#"<g id="points" fill="firebrick">"#);
        for p in points {
            let (x, y) = px(p.recall, p.precision);
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2"/>"#);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
