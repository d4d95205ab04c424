//! SVG 1.1 rendering of a scored scatterplot: points, 1σ/2σ component
//! ellipses, and per-pair ambiguity annotations.

use std::fmt::Write;

use crate::types::{AmbiguityReport, Scatterplot};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#e377c2", "#8c564b",
    "#bcbd22", "#7f7f7f",
];

/// Renders a report as a standalone square SVG document.
///
/// Each component draws a 1σ and a 2σ ellipse in its palette color; each
/// pair draws a dashed center-to-center line labeled with its ambiguity.
pub fn render_report_svg(plot: &Scatterplot, report: &AmbiguityReport, size: u32) -> String {
    let comps = report.decomposition().components();
    // Data bounds including 2σ ellipse extents.
    let mut lo = [f64::INFINITY, f64::INFINITY];
    let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in plot.points() {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    for c in comps {
        let r = 2.0 * c.major_sd();
        for a in 0..2 {
            lo[a] = lo[a].min(c.center()[a] - r);
            hi[a] = hi[a].max(c.center()[a] + r);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let margin = 0.06 * span;
    let scale = size as f64 / (span + 2.0 * margin);
    let sx = |x: f64| (x - lo[0] + margin) * scale;
    // SVG y grows downward; flip so the plot reads like a chart.
    let sy = |y: f64| size as f64 - (y - lo[1] + margin) * scale;

    let mut out = String::new();
    let _ = writeln!(out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"##
    );
    let _ = writeln!(
        out,
        r##"  <rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>"##
    );
    for p in plot.points() {
        let _ = writeln!(
            out,
            r##"  <circle cx="{:.2}" cy="{:.2}" r="2" fill="#3a3a3a" fill-opacity="0.55"/>"##,
            sx(p[0]),
            sy(p[1])
        );
    }
    for (i, c) in comps.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let cx = sx(c.center()[0]);
        let cy = sy(c.center()[1]);
        // The y-flip mirrors angles.
        let deg = -c.angle().to_degrees();
        for (mult, width, opacity) in [(1.0, 2.0, 0.9), (2.0, 1.2, 0.5)] {
            let _ = writeln!(
                out,
                r##"  <ellipse cx="0" cy="0" rx="{:.2}" ry="{:.2}" transform="translate({cx:.2} {cy:.2}) rotate({deg:.2})" fill="none" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}"/>"##,
                mult * c.major_sd() * scale,
                mult * c.minor_sd() * scale,
            );
        }
        let _ = writeln!(
            out,
            r##"  <text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"##,
            cx + 4.0,
            cy - 4.0,
            i
        );
    }
    for pa in report.pairs() {
        let (i, j) = pa.pair;
        let (a, b) = (comps[i].center(), comps[j].center());
        let (x1, y1, x2, y2) = (sx(a[0]), sy(a[1]), sx(b[0]), sy(b[1]));
        let _ = writeln!(
            out,
            r##"  <line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#777777" stroke-width="0.8" stroke-dasharray="4 3" stroke-opacity="0.7"/>"#
        );
        let _ = writeln!(
            out,
            r##"  <text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="#555555">A={:.3}</text>"##,
            (x1 + x2) / 2.0 + 3.0,
            (y1 + y2) / 2.0 - 3.0,
            pa.ambiguity
        );
    }
    let _ = writeln!(
        out,
        r##"  <text x="8" y="16" font-family="sans-serif" font-size="13" fill="#111111">ambiguity score {:.4} (k={})</text>"##,
        report.score(),
        report.decomposition().k_opt()
    );
    out.push_str("</svg>\n");
    out
}
