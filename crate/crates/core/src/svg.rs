//! Self-contained SVG rendering of a canonical conformal mesh.

use std::fmt::Write;

use crate::contour::Contour;
use crate::domain::Domain2;
use crate::geometry::{Piece, Point2};

const ARC_SAMPLES: usize = 64;
const WIDTH_PX: f64 = 800.0;

fn fmt(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn points_attr(points: &[Point2]) -> String {
    points
        .iter()
        .map(|p| format!("{},{}", fmt(p.x), fmt(p.y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn boundary_points(domain: &Domain2) -> Vec<Point2> {
    let mut pts = Vec::new();
    for b in domain.pieces() {
        match b.geometry {
            Piece::Segment(s) => pts.push(s.start),
            Piece::Arc(_) => {
                pts.extend((0..ARC_SAMPLES).map(|k| b.geometry.point_at(k as f64 / ARC_SAMPLES as f64)))
            }
        }
    }
    pts
}

/// Render the domain outline with `u`-isolines and `v`-isolines, one `<g>`
/// per level, in two stroke classes. The y axis points up.
pub fn mesh_svg(domain: &Domain2, u: &[Contour], v: &[Contour]) -> String {
    let b = domain.bounds();
    let pad = 0.03 * domain.diameter();
    let (x0, y0) = (b.min.x - pad, b.min.y - pad);
    let (w, h) = (b.width() + 2.0 * pad, b.height() + 2.0 * pad);
    let stroke = 0.003 * domain.diameter();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        fmt(x0),
        fmt(-(y0 + h)),
        fmt(w),
        fmt(h),
        fmt(WIDTH_PX),
        fmt((WIDTH_PX * h / w).round())
    );
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    let _ = writeln!(
        out,
        r#"<polygon class="boundary" points="{}" style="fill:#fafafa;stroke:#000000;stroke-width:{}"/>"#,
        points_attr(&boundary_points(domain)),
        fmt(2.0 * stroke)
    );
    for (class, colour, contours) in [("u-contour", "#1f5fbf", u), ("v-contour", "#c0392b", v)] {
        for c in contours {
            let _ = writeln!(
                out,
                r#"<g class="{class}" data-level="{}" style="fill:none;stroke:{colour};stroke-width:{}">"#,
                fmt(c.level),
                fmt(stroke)
            );
            for line in &c.polylines {
                let _ = writeln!(out, r#"<polyline points="{}"/>"#, points_attr(line));
            }
            out.push_str("</g>\n");
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
