//! Metric neighborhoods of the cone points.
//!
//! Polygons are triangulated and straight-line cones ("windows") are unfolded
//! outward from every corner of every cone point. A shortest path from Λ
//! never passes through another cone point, so the distance to Λ at a point
//! is the smallest apex distance over the windows that see it. Distances are
//! then sampled on a grid of cells; a cell counts when its center lies within
//! `R` plus the cell half-diagonal, which makes the piece a superset.

use super::{GluingKind, HalfTranslationSurface, Pt};
use serde_json::{json, Value};

use crate::json::num;

const MAX_WINDOWS: usize = 4_000_000;
const MAX_SAMPLES: f64 = 3.0e6;

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodPiece {
    pub radius: f64,
    /// Area of the cells retained (a superset of the true neighborhood).
    pub area: f64,
    /// Boundary length estimated from the growth rate of the area.
    pub boundary_length: f64,
    /// `R` reaches every point: the whole surface is returned.
    pub covers_surface: bool,
    /// Window budget ran out; distances may be overestimated.
    pub truncated: bool,
    pub cell_size: f64,
    /// Retained cell centers, per polygon, in current coordinates.
    pub cells: Vec<(usize, Pt)>,
}

impl NeighborhoodPiece {
    pub fn to_json(&self) -> Value {
        json!({
            "radius": num(self.radius),
            "area": num(self.area),
            "boundary_length": num(self.boundary_length),
            "covers_surface": self.covers_surface,
            "truncated": self.truncated,
            "cell_size": num(self.cell_size),
            "cells": self.cells.len(),
        })
    }
}

#[derive(Clone, Copy)]
struct Map {
    kind: GluingKind,
    c: Pt,
}

impl Map {
    fn apply(self, x: Pt) -> Pt {
        match self.kind {
            GluingKind::Translation => x.add(self.c),
            GluingKind::HalfTurn => x.neg().add(self.c),
        }
    }
}

struct Tri {
    poly: usize,
    pts: [Pt; 3],
    /// Polygon vertex index of each corner.
    corner: [usize; 3],
    nbr: [Option<(usize, usize, Map)>; 3],
}

#[derive(Clone, Copy)]
enum Entry {
    /// Window starts at this corner of the triangle.
    Corner(usize),
    /// Window came in through this edge.
    Edge(usize),
}

#[derive(Clone, Copy)]
struct Window {
    apex: Pt,
    /// `None` when the apex is a corner of the triangle itself.
    span: Option<(Pt, Pt)>,
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
fn triangulate(v: &[Pt]) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut out = Vec::new();
    let mut guard = 0;
    while idx.len() > 3 && guard < 10 * v.len() * v.len() {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let area = v[b].sub(v[a]).cross(v[c].sub(v[a]));
            let scale = v[b].sub(v[a]).norm() * v[c].sub(v[a]).norm();
            if area <= 1e-12 * scale {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == a || j == b || j == c {
                    return false;
                }
                let p = v[j];
                let s1 = v[b].sub(v[a]).cross(p.sub(v[a]));
                let s2 = v[c].sub(v[b]).cross(p.sub(v[b]));
                let s3 = v[a].sub(v[c]).cross(p.sub(v[c]));
                s1 >= -1e-14 && s2 >= -1e-14 && s3 >= -1e-14
            });
            if !blocked {
                out.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        out.push([idx[0], idx[1], idx[2]]);
    }
    out
}

fn build_triangles(s: &HalfTranslationSurface) -> Vec<Tri> {
    let polys = s.polygons();
    let mut tris = Vec::new();
    // (poly, polygon edge) -> (triangle, triangle edge)
    let mut edge_home = std::collections::HashMap::new();
    let mut diag = std::collections::HashMap::new();
    for (p, poly) in polys.iter().enumerate() {
        let v = &poly.vertices;
        let n = v.len();
        for t in triangulate(v) {
            let ti = tris.len();
            for k in 0..3 {
                let (i, j) = (t[k], t[(k + 1) % 3]);
                if j == (i + 1) % n {
                    edge_home.insert((p, i), (ti, k));
                } else {
                    diag.insert((p, i, j), (ti, k));
                }
            }
            tris.push(Tri { poly: p, pts: [v[t[0]], v[t[1]], v[t[2]]], corner: t, nbr: [None; 3] });
        }
    }
    let identity = Map { kind: GluingKind::Translation, c: Pt::new(0.0, 0.0) };
    for ti in 0..tris.len() {
        let p = tris[ti].poly;
        let v = &polys[p].vertices;
        let n = v.len();
        for k in 0..3 {
            let (i, j) = (tris[ti].corner[k], tris[ti].corner[(k + 1) % 3]);
            if j == (i + 1) % n {
                if let Some((q, kind)) = s.partner(p, i) {
                    let w = &polys[q.poly].vertices;
                    let b1 = w[(q.edge + 1) % w.len()];
                    let c = match kind {
                        GluingKind::Translation => b1.sub(v[i]),
                        GluingKind::HalfTurn => b1.add(v[i]),
                    };
                    let &(tj, kj) = edge_home.get(&(q.poly, q.edge)).expect("every polygon edge lies on a triangle");
                    tris[ti].nbr[k] = Some((tj, kj, Map { kind, c }));
                }
            } else if let Some(&(tj, kj)) = diag.get(&(p, j, i)) {
                tris[ti].nbr[k] = Some((tj, kj, identity));
            }
        }
    }
    tris
}

fn seg_dist(a: Pt, p: Pt, q: Pt) -> f64 {
    let d = q.sub(p);
    let l2 = d.dot(d);
    let t = if l2 > 0.0 { (a.sub(p).dot(d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    a.sub(p.add(d.scale(t))).norm()
}

/// Part of segment `e0 e1` inside the cone from `a` spanned by `p0`, `p1`.
fn clip_to_cone(a: Pt, p0: Pt, p1: Pt, e0: Pt, e1: Pt) -> Option<(f64, f64)> {
    let (p0, p1) = if p0.sub(a).cross(p1.sub(a)) >= 0.0 { (p0, p1) } else { (p1, p0) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let de = e1.sub(e0);
    // cross(p0 - a, e(s) - a) >= 0 and cross(e(s) - a, p1 - a) >= 0
    for (u, sign) in [(p0.sub(a), 1.0), (p1.sub(a), -1.0)] {
        let c0 = sign * u.cross(e0.sub(a));
        let c1 = sign * u.cross(de);
        if c1.abs() < 1e-300 {
            if c0 < -1e-13 * u.norm() * e0.sub(a).norm().max(1e-300) {
                return None;
            }
        } else {
            let s = -c0 / c1;
            if c1 > 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
        }
    }
    (hi - lo > 1e-12).then_some((lo, hi))
}

fn in_cone(w: &Window, x: Pt) -> bool {
    match w.span {
        None => true,
        Some((p0, p1)) => {
            let a = w.apex;
            let (u0, u1, ux) = (p0.sub(a), p1.sub(a), x.sub(a));
            let o = u0.cross(u1).signum();
            let tol = 1e-12 * ux.norm() * u0.norm().max(u1.norm());
            o * u0.cross(ux) >= -tol && o * ux.cross(u1) >= -tol
        }
    }
}

/// Windows per triangle reaching within `reach` of Λ.
fn unfold(s: &HalfTranslationSurface, tris: &[Tri], reach: f64) -> (Vec<Vec<Window>>, bool) {
    let mut windows: Vec<Vec<Window>> = (0..tris.len()).map(|_| Vec::new()).collect();
    let mut stack: Vec<(usize, Entry, Window)> = Vec::new();
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let c = s.class_of(t.poly, t.corner[k]);
            if s.classes()[c].is_cone_point() {
                stack.push((ti, Entry::Corner(k), Window { apex: t.pts[k], span: None }));
            }
        }
    }
    let mut count = 0usize;
    let mut truncated = false;
    while let Some((ti, entry, w)) = stack.pop() {
        count += 1;
        if count > MAX_WINDOWS {
            truncated = true;
            break;
        }
        windows[ti].push(w);
        let t = &tris[ti];
        let exits: Vec<usize> = match entry {
            Entry::Corner(k) => vec![(k + 1) % 3],
            Entry::Edge(k) => vec![(k + 1) % 3, (k + 2) % 3],
        };
        for e in exits {
            let Some((tj, kj, map)) = t.nbr[e] else { continue };
            let (e0, e1) = (t.pts[e], t.pts[(e + 1) % 3]);
            let (lo, hi) = match w.span {
                None => (0.0, 1.0),
                Some((p0, p1)) => match clip_to_cone(w.apex, p0, p1, e0, e1) {
                    Some(r) => r,
                    None => continue,
                },
            };
            let q0 = e0.add(e1.sub(e0).scale(lo));
            let q1 = e0.add(e1.sub(e0).scale(hi));
            if seg_dist(w.apex, q0, q1) > reach {
                continue;
            }
            let nw = Window { apex: map.apply(w.apex), span: Some((map.apply(q0), map.apply(q1))) };
            stack.push((tj, Entry::Edge(kj), nw));
        }
    }
    (windows, truncated)
}

fn in_triangle(t: &Tri, x: Pt, eps: f64) -> bool {
    (0..3).all(|k| t.pts[(k + 1) % 3].sub(t.pts[k]).cross(x.sub(t.pts[k])) >= -eps)
}

/// Approximates the set of points within distance `r` of Λ.
pub fn r_neighborhood(s: &HalfTranslationSurface, r: f64) -> Result<NeighborhoodPiece, String> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(format!("radius must be positive, got {r}"));
    }
    let mut piece = NeighborhoodPiece {
        radius: r,
        area: 0.0,
        boundary_length: 0.0,
        covers_surface: false,
        truncated: false,
        cell_size: 0.0,
        cells: Vec::new(),
    };
    if s.cone_points().is_empty() {
        return Ok(piece);
    }
    let polys = s.polygons();
    let bbox_area: f64 = polys
        .iter()
        .map(|p| {
            let (lo, hi) = bbox(&p.vertices);
            (hi.x - lo.x) * (hi.y - lo.y)
        })
        .sum();
    let h = (r / 100.0).max((bbox_area / MAX_SAMPLES).sqrt());
    let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
    let delta = 3.0 * h;
    let reach = r + half_diag.max(delta);
    let tris = build_triangles(s);
    let (windows, truncated) = unfold(s, &tris, reach);
    piece.truncated = truncated;
    piece.cell_size = h;
    let cell = h * h;
    let (mut inner, mut outer) = (0.0, 0.0);
    let mut all_in = true;
    for (p, poly) in polys.iter().enumerate() {
        let (lo, hi) = bbox(&poly.vertices);
        let my: Vec<usize> = (0..tris.len()).filter(|&t| tris[t].poly == p).collect();
        let nx = ((hi.x - lo.x) / h).ceil() as usize;
        let ny = ((hi.y - lo.y) / h).ceil() as usize;
        for iy in 0..ny {
            for ix in 0..nx {
                let x = Pt::new(lo.x + (ix as f64 + 0.5) * h, lo.y + (iy as f64 + 0.5) * h);
                let Some(&ti) = my.iter().find(|&&t| in_triangle(&tris[t], x, 1e-14)) else { continue };
                let d = windows[ti]
                    .iter()
                    .filter(|w| in_cone(w, x))
                    .map(|w| x.sub(w.apex).norm())
                    .fold(f64::INFINITY, f64::min);
                if d <= r + half_diag {
                    piece.cells.push((p, x));
                } else {
                    all_in = false;
                }
                if d <= r - delta {
                    inner += cell;
                }
                if d <= r + delta {
                    outer += cell;
                }
            }
        }
    }
    piece.area = piece.cells.len() as f64 * cell;
    piece.boundary_length = (outer - inner) / (2.0 * delta);
    if all_in && s.is_closed() {
        piece.covers_surface = true;
        piece.area = s.area();
        piece.boundary_length = 0.0;
    }
    Ok(piece)
}

fn bbox(v: &[Pt]) -> (Pt, Pt) {
    let mut lo = Pt::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Pt::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in v {
        lo = Pt::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Pt::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}
