//! Static SVG figures: critical graphs in chart coordinates, ideal polygons
//! and crowns in the half-plane or disk model, developed harmonic images.

use crate::crowned::{CrownEnd, IdealPoint, IdealPolygon};
use crate::flatsurf::{CriticalGraph, HalfTranslationSurface};
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    HalfPlane,
    Disk,
}

struct Canvas {
    body: String,
    min: (f64, f64),
    max: (f64, f64),
}

impl Canvas {
    fn new() -> Self {
        Canvas { body: String::new(), min: (f64::INFINITY, f64::INFINITY), max: (f64::NEG_INFINITY, f64::NEG_INFINITY) }
    }

    fn extend(&mut self, (x, y): (f64, f64)) {
        self.min = (self.min.0.min(x), self.min.1.min(y));
        self.max = (self.max.0.max(x), self.max.1.max(y));
    }

    /// SVG's y axis points down; points are flipped on output.
    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, closed: bool) {
        let pts: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        if pts.len() < 2 {
            return;
        }
        pts.iter().for_each(|&p| self.extend(p));
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.6} {:.6} ", if i == 0 { "M" } else { "L" }, p.0, -p.1);
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="{width}" vector-effect="non-scaling-stroke"/>"#,
            d.trim_end()
        );
    }

    fn dot(&mut self, p: (f64, f64), r: f64, fill: &str) {
        self.extend(p);
        let _ = writeln!(self.body, r#"<circle cx="{:.6}" cy="{:.6}" r="{r}" fill="{fill}"/>"#, p.0, -p.1);
    }

    fn finish(self) -> String {
        let (w, h) = ((self.max.0 - self.min.0).max(1e-9), (self.max.1 - self.min.1).max(1e-9));
        let pad = 0.05 * w.max(h);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\" width=\"800\" height=\"{:.0}\">\n{}</svg>\n",
            self.min.0 - pad,
            -self.max.1 - pad,
            w + 2.0 * pad,
            h + 2.0 * pad,
            800.0 * (h + 2.0 * pad) / (w + 2.0 * pad),
            self.body
        )
    }
}

/// Half-plane point to the disk, inverse to `w ↦ i(1 + w)/(1 − w)`.
pub fn to_disk((x, y): (f64, f64)) -> (f64, f64) {
    // (z − i)/(z + i)
    let (nr, ni, dr, di) = (x, y - 1.0, x, y + 1.0);
    let q = dr * dr + di * di;
    ((nr * dr + ni * di) / q, (ni * dr - nr * di) / q)
}

/// Samples of the geodesic between two ideal points, evenly spaced in
/// hyperbolic arclength out to distance `reach` from the top of the arc.
fn geodesic_samples(p: IdealPoint, q: IdealPoint, reach: f64) -> Vec<(f64, f64)> {
    let n = 200;
    let s = |k: usize| -reach + 2.0 * reach * k as f64 / n as f64;
    match (p, q) {
        (IdealPoint::Finite(a), IdealPoint::Finite(b)) => {
            let (c, r) = ((a + b) / 2.0, (b - a).abs() / 2.0);
            let sign = if b > a { 1.0 } else { -1.0 };
            (0..=n)
                .map(|k| {
                    // Angle from the real axis at a, by arclength.
                    let t = 2.0 * s(k).exp().atan();
                    (c - sign * r * t.cos(), r * t.sin())
                })
                .collect()
        }
        (IdealPoint::Finite(a), IdealPoint::Infinity) => (0..=n).map(|k| (a, s(k).exp())).collect(),
        (IdealPoint::Infinity, IdealPoint::Finite(b)) => (0..=n).rev().map(|k| (b, s(k).exp())).collect(),
        _ => Vec::new(),
    }
}

fn draw_frame(c: &mut Canvas, model: Model, span: f64) {
    match model {
        Model::Disk => {
            let circle: Vec<(f64, f64)> = (0..=360).map(|k| (k as f64).to_radians()).map(|t| (t.cos(), t.sin())).collect();
            c.polyline(&circle, "#888", 1.0, true);
        }
        Model::HalfPlane => c.polyline(&[(-span, 0.0), (span, 0.0)], "#888", 1.0, false),
    }
}

fn draw_sides(c: &mut Canvas, model: Model, sides: &[(IdealPoint, IdealPoint)], stroke: &str) {
    for &(p, q) in sides {
        let pts = geodesic_samples(p, q, 12.0);
        let pts: Vec<(f64, f64)> = match model {
            Model::Disk => pts.into_iter().map(to_disk).collect(),
            Model::HalfPlane => pts,
        };
        c.polyline(&pts, stroke, 1.5, false);
    }
}

fn finite_span(pts: &[IdealPoint]) -> f64 {
    pts.iter().filter_map(|p| if let IdealPoint::Finite(x) = p { Some(x.abs()) } else { None }).fold(1.0, f64::max) * 1.2
}

pub fn polygon_svg(polygon: &IdealPolygon, model: Model) -> String {
    let v = &polygon.vertices;
    let sides: Vec<(IdealPoint, IdealPoint)> = (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect();
    let mut c = Canvas::new();
    draw_frame(&mut c, model, finite_span(v));
    draw_sides(&mut c, model, &sides, "#1f5fbf");
    if model == Model::Disk {
        for p in v {
            let t = p.disk_angle();
            c.dot((t.cos(), t.sin()), 0.012, "#c0392b");
        }
    }
    c.finish()
}

pub fn crown_svg(crown: &CrownEnd, model: Model) -> String {
    let mut c = Canvas::new();
    draw_frame(&mut c, model, finite_span(&crown.cusps));
    draw_sides(&mut c, model, &crown.sides(), "#8e44ad");
    c.finish()
}

/// Developed image curves (half-plane coordinates) drawn in the disk,
/// optionally over the ideal polygon they converge to.
pub fn developed_svg(curves: &[Vec<(f64, f64)>], polygon: Option<&IdealPolygon>) -> String {
    let mut c = Canvas::new();
    draw_frame(&mut c, Model::Disk, 1.0);
    if let Some(p) = polygon {
        let v = &p.vertices;
        let sides: Vec<(IdealPoint, IdealPoint)> = (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect();
        draw_sides(&mut c, Model::Disk, &sides, "#1f5fbf");
    }
    for curve in curves {
        let pts: Vec<(f64, f64)> = curve.iter().map(|&p| to_disk(p)).collect();
        c.polyline(&pts, "#c0392b", 1.0, false);
    }
    c.finish()
}

/// Polygons laid out left to right in chart coordinates with the horizontal
/// critical graph drawn over them.
pub fn critical_graph_svg(surface: &HalfTranslationSurface, graph: &CriticalGraph) -> String {
    let mut c = Canvas::new();
    let t = surface.vertical_scale();
    let mut shift = Vec::new();
    let mut x = 0.0;
    for p in surface.polygons() {
        let (lo, hi) = p.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v.x), b.max(v.x)));
        shift.push(x - lo);
        x += (hi - lo) * 1.15;
    }
    for (p, dx) in surface.polygons().iter().zip(&shift) {
        let pts: Vec<(f64, f64)> = p.vertices.iter().map(|v| (v.x + dx, v.y)).collect();
        c.polyline(&pts, "#888", 1.0, true);
        for &v in &pts {
            c.dot(v, 0.01 * x.max(1.0), "#333");
        }
    }
    for sep in &graph.separatrices {
        for seg in sep.segments() {
            let dx = shift[seg.poly];
            c.polyline(&[(seg.a.x + dx, seg.a.y * t), (seg.b.x + dx, seg.b.y * t)], "#c0392b", 2.0, false);
        }
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use IdealPoint::{Finite as F, Infinity as I};

    #[test]
    fn disk_map_sends_ideal_points_to_their_angles() {
        for t in [0.3, 1.0, 2.5, 4.0, 6.0] {
            let IdealPoint::Finite(x) = IdealPoint::from_disk_angle(t) else { panic!() };
            let (a, b) = to_disk((x, 0.0));
            assert!((a - t.cos()).abs() < 1e-12 && (b - t.sin()).abs() < 1e-12);
        }
        assert_eq!(to_disk((0.0, 1.0)), (0.0, 0.0));
    }

    #[test]
    fn polygon_figure_has_one_path_per_side() {
        let p = IdealPolygon::new(vec![F(-1.0), F(0.0), F(1.0), I]).unwrap();
        let svg = polygon_svg(&p, Model::Disk);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<path").count(), 4 + 1);
        assert_eq!(svg.matches("<circle").count(), 4);
        let half = polygon_svg(&p, Model::HalfPlane);
        assert_eq!(half.matches("<path").count(), 4 + 1);
    }

    #[test]
    fn geodesic_samples_stay_on_their_circle() {
        for (a, b) in [(-1.0, 3.0), (2.0, -0.5)] {
            let (c, r) = ((a + b) / 2.0, f64::abs(b - a) / 2.0);
            let pts = geodesic_samples(F(a), F(b), 8.0);
            assert!(pts.iter().all(|p| ((p.0 - c).hypot(p.1) - r).abs() < 1e-12 && p.1 > 0.0));
            // Ordered from a towards b.
            assert!((pts[0].0 - a).abs() < (pts[0].0 - b).abs());
        }
    }
}
