//! Straight-line flow on the surface: ray casting inside polygons, edge
//! crossings, and passage through regular vertices.

use super::{GluingKind, HalfTranslationSurface, Pt, SNAP};
use std::f64::consts::PI;
use thiserror::Error;

const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("vertex class {0} does not exist")]
    BadClass(usize),
    #[error("vertex class {0} is not a cone point")]
    NotConePoint(usize),
    #[error("vertex class {0} has no horizontal direction {1}")]
    BadDirection(usize, usize),
    #[error("length budget must be positive, got {0}")]
    BadBudget(f64),
}

/// A horizontal direction leaving a cone point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SepDir {
    /// Index into the class's corner list.
    pub corner: usize,
    /// Angle measured counterclockwise from the corner's outgoing edge.
    pub offset: f64,
    /// Unit direction in the tracing frame of the corner's polygon.
    pub dir: Pt,
}

/// A piece of a trajectory inside one polygon, in tracing coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seg {
    pub poly: usize,
    pub a: Pt,
    pub b: Pt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleConnection {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub length: f64,
    /// Displacement in the frame of the starting polygon.
    pub holonomy: Pt,
    pub segments: Vec<Seg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnresolvedReason {
    HitBoundary,
    LengthBudget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnresolvedRay {
    pub from: (usize, usize),
    pub reason: UnresolvedReason,
    pub length: f64,
    pub segments: Vec<Seg>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceOutcome {
    Saddle(SaddleConnection),
    Unresolved(UnresolvedRay),
}

pub(crate) fn corner_angle(pts: &[Pt], i: usize) -> f64 {
    let n = pts.len();
    let v = pts[i];
    let a = pts[(i + 1) % n].sub(v);
    let b = pts[(i + n - 1) % n].sub(v);
    let mut t = a.cross(b).atan2(a.dot(b));
    if t <= 0.0 {
        t += 2.0 * PI;
    }
    t
}

fn out_angle(pts: &[Pt], i: usize) -> f64 {
    let n = pts.len();
    let e = pts[(i + 1) % n].sub(pts[i]);
    e.y.atan2(e.x)
}

/// Angle in `[0, 2π)` from the outgoing edge at vertex `i` to direction `d`.
fn offset_of(pts: &[Pt], i: usize, d: Pt) -> f64 {
    (d.y.atan2(d.x) - out_angle(pts, i)).rem_euclid(2.0 * PI)
}

/// Horizontal directions at a vertex class, counterclockwise from its first corner.
pub fn separatrix_directions(s: &HalfTranslationSurface, class: usize) -> Vec<SepDir> {
    let cl = &s.classes()[class];
    let mut out = Vec::new();
    for (ci, &(p, v)) in cl.corners.iter().enumerate() {
        let pts = s.base(p);
        let theta = corner_angle(pts, v);
        let phi = out_angle(pts, v);
        let mut alpha = (-phi).rem_euclid(PI);
        if alpha > PI - ANGLE_TOL {
            alpha = 0.0;
        }
        while alpha < theta - ANGLE_TOL {
            let dir = if (phi + alpha).cos() > 0.0 { Pt::new(1.0, 0.0) } else { Pt::new(-1.0, 0.0) };
            out.push(SepDir { corner: ci, offset: alpha, dir });
            alpha += PI;
        }
    }
    // Index 0 is the first direction pointing along the positive x-axis of its chart.
    if let Some(k) = out.iter().position(|d| d.dir.x > 0.0) {
        out.rotate_left(k);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum ShotEnd {
    /// Reached a vertex that is not passed through. `dir` is the travel
    /// direction in the frame of `poly`.
    Vertex { class: usize, poly: usize, vertex: usize, dir: Pt },
    Boundary,
    Budget,
    /// The caller's predicate fired; `tag` is whatever it returned.
    Stopped { tag: usize, poly: usize, at: Pt },
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Shot {
    pub end: ShotEnd,
    pub length: f64,
    pub segments: Vec<Seg>,
}

/// Predicate consulted for each segment before it is committed; returns the
/// distance along the segment at which to stop, and a tag.
pub(crate) type StopFn<'a> = dyn Fn(usize, Pt, Pt) -> Option<(f64, usize)> + 'a;

enum Hit {
    Edge { edge: usize, tau: f64 },
    Vertex { vertex: usize, tau: f64 },
}

fn raycast(pts: &[Pt], x: Pt, d: Pt) -> Option<Hit> {
    let n = pts.len();
    let scale = pts.iter().map(|p| p.x.abs().max(p.y.abs())).fold(1.0, f64::max);
    let tau_eps = 1e-11 * scale;
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for i in 0..n {
        let a = pts[i];
        let w = pts[(i + 1) % n].sub(a);
        let len = w.norm();
        let den = d.cross(w);
        if den.abs() < 1e-14 * len {
            // Running along this edge's line: its endpoints are vertex hits.
            if a.sub(x).cross(d).abs() < SNAP {
                for (k, v) in [(i, a), ((i + 1) % n, pts[(i + 1) % n])] {
                    let tau = v.sub(x).dot(d);
                    if tau > tau_eps && best.map_or(true, |b| tau < b.0 - tau_eps) {
                        best = Some((tau, k, 0.0, 1.0));
                    }
                }
            }
            continue;
        }
        let ax = a.sub(x);
        let tau = ax.cross(w) / den;
        let sigma = ax.cross(d) / den;
        let tol = SNAP / len;
        if tau <= tau_eps || sigma < -tol || sigma > 1.0 + tol {
            continue;
        }
        if best.map_or(true, |b| tau < b.0 - tau_eps) {
            best = Some((tau, i, sigma, len));
        }
    }
    let (tau, i, sigma, len) = best?;
    if sigma * len < SNAP {
        Some(Hit::Vertex { vertex: i, tau })
    } else if (1.0 - sigma) * len < SNAP {
        Some(Hit::Vertex { vertex: (i + 1) % n, tau })
    } else {
        Some(Hit::Edge { edge: i, tau })
    }
}

/// Continues a straight line through a regular vertex: returns the corner and
/// direction on the far side.
fn pass_through(s: &HalfTranslationSurface, p: usize, v: usize, d: Pt) -> (usize, usize, Pt) {
    let class = &s.classes()[s.class_of(p, v)];
    let k = class.corners.iter().position(|&c| c == (p, v)).expect("corner in its class");
    let pts = s.base(p);
    let theta = corner_angle(pts, v);
    let mut remaining = offset_of(pts, v, d.neg()).min(theta) + PI;
    let mut idx = k;
    let mut flip = false;
    let m = class.corners.len();
    loop {
        let (q, u) = class.corners[idx];
        let th = corner_angle(s.base(q), u);
        if remaining < th - ANGLE_TOL {
            break;
        }
        remaining -= th;
        let next = (idx + 1) % m;
        flip ^= class.flips[next] != class.flips[idx];
        idx = next;
    }
    let (q, u) = class.corners[idx];
    (q, u, if flip { d.neg() } else { d })
}

/// Straight-line flight from `x` in polygon `p` along unit direction `d`.
/// Regular unmarked vertices are passed through; any other vertex stops.
pub(crate) fn shoot(s: &HalfTranslationSurface, mut p: usize, mut x: Pt, mut d: Pt, budget: f64, stop: &StopFn) -> Shot {
    let mut length = 0.0;
    let mut segments = Vec::new();
    // Leave immediately if starting on an edge and pointing outward.
    {
        let pts = s.base(p);
        let n = pts.len();
        for i in 0..n {
            let a = pts[i];
            let w = pts[(i + 1) % n].sub(a);
            let len = w.norm();
            let off = w.cross(x.sub(a)) / len;
            let along = w.dot(x.sub(a)) / len;
            if off.abs() < SNAP && along > SNAP && along < len - SNAP && w.cross(d) < 0.0 {
                match s.transfer(p, i, x) {
                    Some((q, _, y, kind)) => {
                        p = q;
                        x = y;
                        if kind == GluingKind::HalfTurn {
                            d = d.neg();
                        }
                    }
                    None => return Shot { end: ShotEnd::Boundary, length, segments },
                }
                break;
            }
        }
    }
    let mut steps = 0usize;
    loop {
        steps += 1;
        let pts = s.base(p);
        let Some(hit) = raycast(pts, x, d) else {
            return Shot { end: ShotEnd::Boundary, length, segments };
        };
        let tau = match hit {
            Hit::Edge { tau, .. } | Hit::Vertex { tau, .. } => tau,
        };
        let y = x.add(d.scale(tau));
        if let Some((t, tag)) = stop(p, x, y) {
            let at = x.add(d.scale(t));
            segments.push(Seg { poly: p, a: x, b: at });
            return Shot { end: ShotEnd::Stopped { tag, poly: p, at }, length: length + t, segments };
        }
        if length + tau > budget || steps > 1_000_000 {
            let t = (budget - length).max(0.0);
            segments.push(Seg { poly: p, a: x, b: x.add(d.scale(t)) });
            return Shot { end: ShotEnd::Budget, length: budget, segments };
        }
        segments.push(Seg { poly: p, a: x, b: y });
        length += tau;
        match hit {
            Hit::Edge { edge, .. } => match s.transfer(p, edge, y) {
                Some((q, _, z, kind)) => {
                    p = q;
                    x = z;
                    if kind == GluingKind::HalfTurn {
                        d = d.neg();
                    }
                }
                None => return Shot { end: ShotEnd::Boundary, length, segments },
            },
            Hit::Vertex { vertex, .. } => {
                let c = s.class_of(p, vertex);
                let cl = &s.classes()[c];
                if cl.on_boundary {
                    return Shot { end: ShotEnd::Boundary, length, segments };
                }
                if cl.is_cone_point() {
                    return Shot { end: ShotEnd::Vertex { class: c, poly: p, vertex, dir: d }, length, segments };
                }
                let (q, u, d2) = pass_through(s, p, vertex, d);
                p = q;
                x = s.base(q)[u];
                d = d2;
            }
        }
    }
}

/// Index of the horizontal direction at `class` pointing back along a
/// trajectory that arrived at corner `(p, v)` travelling along `d`.
pub(crate) fn arrival_direction(s: &HalfTranslationSurface, class: usize, p: usize, v: usize, d: Pt) -> Option<usize> {
    let cl = &s.classes()[class];
    let k = cl.corners.iter().position(|&c| c == (p, v))?;
    let pts = s.base(p);
    let theta = corner_angle(pts, v);
    let mut beta = offset_of(pts, v, d.neg());
    if beta > 2.0 * PI - 1e-7 {
        beta = 0.0;
    }
    let (corner, offset) = if beta > theta - 1e-7 { ((k + 1) % cl.corners.len(), 0.0) } else { (k, beta) };
    separatrix_directions(s, class)
        .iter()
        .position(|sd| sd.corner == corner && (sd.offset - offset).abs() < 1e-6)
}

/// Follows horizontal direction `direction` out of cone point `point`.
pub fn trace_separatrix(s: &HalfTranslationSurface, point: usize, direction: usize, budget: f64) -> Result<TraceOutcome, TraceError> {
    if !(budget > 0.0) {
        return Err(TraceError::BadBudget(budget));
    }
    let cl = s.classes().get(point).ok_or(TraceError::BadClass(point))?;
    if !cl.is_cone_point() {
        return Err(TraceError::NotConePoint(point));
    }
    let dirs = separatrix_directions(s, point);
    let sd = *dirs.get(direction).ok_or(TraceError::BadDirection(point, direction))?;
    let (p, v) = cl.corners[sd.corner];
    let shot = shoot(s, p, s.base(p)[v], sd.dir, budget, &|_, _, _| None);
    let from = (point, direction);
    Ok(match shot.end {
        ShotEnd::Vertex { class, poly, vertex, dir } => {
            let back = arrival_direction(s, class, poly, vertex, dir).expect("arrival matches a horizontal direction");
            TraceOutcome::Saddle(SaddleConnection {
                from,
                to: (class, back),
                length: shot.length,
                holonomy: sd.dir.scale(shot.length),
                segments: shot.segments,
            })
        }
        ShotEnd::Boundary => TraceOutcome::Unresolved(UnresolvedRay {
            from,
            reason: UnresolvedReason::HitBoundary,
            length: shot.length,
            segments: shot.segments,
        }),
        ShotEnd::Budget | ShotEnd::Stopped { .. } => TraceOutcome::Unresolved(UnresolvedRay {
            from,
            reason: UnresolvedReason::LengthBudget,
            length: shot.length,
            segments: shot.segments,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::flatsurf::{build_surface, stretch};

    #[test]
    fn slit_torus_separatrices() {
        // The two slit segments become saddle connections of length 1/4;
        // the remaining two directions have irrational slope and never return.
        let s = build_surface(&catalog::slit_torus()).unwrap();
        let c = s.cone_points()[0];
        assert_eq!(separatrix_directions(&s, c).len(), 6);
        let mut saddles = 0;
        for i in 0..6 {
            match trace_separatrix(&s, c, i, 30.0).unwrap() {
                TraceOutcome::Saddle(sc) => {
                    saddles += 1;
                    assert!((sc.length - 0.25).abs() < 1e-12, "{}", sc.length);
                    assert_eq!(sc.to.0, c);
                    let TraceOutcome::Saddle(back) = trace_separatrix(&s, c, sc.to.1, 30.0).unwrap() else { panic!() };
                    assert_eq!(back.to, (c, i));
                }
                TraceOutcome::Unresolved(u) => assert_eq!(u.reason, UnresolvedReason::LengthBudget),
            }
        }
        assert_eq!(saddles, 4);
        assert!(matches!(trace_separatrix(&s, c, 6, 1.0), Err(TraceError::BadDirection(..))));
        assert!(matches!(trace_separatrix(&s, c, 0, 0.0), Err(TraceError::BadBudget(_))));
    }

    #[test]
    fn power_chart_rays_all_escape() {
        let s = build_surface(&catalog::power_chart(4, 2.0)).unwrap();
        let c = s.cone_points()[0];
        assert_eq!(separatrix_directions(&s, c).len(), 6);
        for i in 0..6 {
            let TraceOutcome::Unresolved(u) = trace_separatrix(&s, c, i, 100.0).unwrap() else { panic!() };
            assert_eq!(u.reason, UnresolvedReason::HitBoundary);
            assert!((u.length - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn marked_torus_corner_returns_after_one_unit() {
        let mut spec = catalog::square_torus();
        spec.marked.push((0, 0));
        let s = build_surface(&spec).unwrap();
        let c = s.cone_points()[0];
        for i in 0..2 {
            let TraceOutcome::Saddle(sc) = trace_separatrix(&s, c, i, 10.0).unwrap() else { panic!() };
            assert!((sc.length - 1.0).abs() < 1e-12);
            assert!((sc.holonomy.x.abs() - 1.0).abs() < 1e-12 && sc.holonomy.y == 0.0);
            assert_eq!(sc.to, (c, 1 - i));
        }
    }

    #[test]
    fn irrational_slope_leaf_exhausts_budget() {
        // Lattice spanned by (1, g) and (0, 1) with g irrational: the
        // horizontal leaf through the marked corner is dense.
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut spec = catalog::square_torus();
        spec.polygons[0].vertices = vec![Pt::new(0.0, 0.0), Pt::new(1.0, g), Pt::new(1.0, 1.0 + g), Pt::new(0.0, 1.0)];
        spec.marked.push((0, 0));
        let s = build_surface(&spec).unwrap();
        let c = s.cone_points()[0];
        let TraceOutcome::Unresolved(u) = trace_separatrix(&s, c, 0, 50.0).unwrap() else { panic!() };
        assert_eq!(u.reason, UnresolvedReason::LengthBudget);
        assert_eq!(u.length, 50.0);
    }

    #[test]
    fn stretching_keeps_horizontal_lengths() {
        let s = build_surface(&catalog::slit_torus()).unwrap();
        let t = stretch(&s, 7.5).unwrap();
        let c = s.cone_points()[0];
        for i in 0..6 {
            let a = trace_separatrix(&s, c, i, 100.0).unwrap();
            let b = trace_separatrix(&t, c, i, 100.0).unwrap();
            assert_eq!(a, b);
        }
    }
}
