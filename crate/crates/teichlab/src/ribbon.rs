//! Metric ribbon graphs: half-edges with a cyclic order at each vertex, a twin
//! involution (rays have no twin) and lengths.
//!
//! Boundary walk: `next(h) = cyclic_next(twin(h))`. With counterclockwise
//! cyclic orders the face traced this way lies to the right of the walk.

use crate::json::{num, Decimal};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct HalfEdge {
    pub id: usize,
    pub vertex: usize,
    pub cyclic_pos: usize,
    pub twin: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct MetricRibbonGraph {
    pub vertices: usize,
    pub half_edges: Vec<HalfEdge>,
    /// Per half-edge; `f64::INFINITY` marks a ray.
    pub lengths: Vec<f64>,
    rotations: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RibbonError {
    #[error("half-edge {0}: id does not match its position")]
    BadId(usize),
    #[error("half-edge {0}: vertex {1} out of range")]
    BadVertex(usize, usize),
    #[error("half-edge {0}: twin is not an involution")]
    BadTwin(usize),
    #[error("vertex {0}: cyclic positions are not 0..{1}")]
    BadRotation(usize, usize),
    #[error("vertex {0} has no half-edges")]
    IsolatedVertex(usize),
    #[error("half-edge {0}: length {1} invalid (finite edges need positive length, rays infinite)")]
    BadLength(usize, f64),
    #[error("half-edges {0} and {1}: twin lengths differ")]
    TwinLength(usize, usize),
    #[error("expected {0} lengths, found {1}")]
    LengthCount(usize, usize),
}

/// A boundary component running from an incoming ray to an outgoing ray.
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub incoming: usize,
    pub walk: Vec<usize>,
    pub outgoing: usize,
    pub length: f64,
}

/// A closed boundary component made of finite edges only.
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    pub walk: Vec<usize>,
    pub length: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Boundary {
    pub lines: Vec<Line>,
    pub cycles: Vec<Cycle>,
}

impl MetricRibbonGraph {
    pub fn new(vertices: usize, half_edges: Vec<HalfEdge>, lengths: Vec<f64>) -> Result<Self, RibbonError> {
        if lengths.len() != half_edges.len() {
            return Err(RibbonError::LengthCount(half_edges.len(), lengths.len()));
        }
        let mut rotations = vec![Vec::new(); vertices];
        for (i, h) in half_edges.iter().enumerate() {
            if h.id != i {
                return Err(RibbonError::BadId(i));
            }
            if h.vertex >= vertices {
                return Err(RibbonError::BadVertex(i, h.vertex));
            }
            rotations[h.vertex].push(i);
            match h.twin {
                Some(t) if t >= half_edges.len() || t == i || half_edges[t].twin != Some(i) => {
                    return Err(RibbonError::BadTwin(i))
                }
                Some(t) => {
                    let (a, b) = (lengths[i], lengths[t]);
                    if !(a.is_finite() && a > 0.0) {
                        return Err(RibbonError::BadLength(i, a));
                    }
                    if (a - b).abs() > 1e-12 * a.max(b) {
                        return Err(RibbonError::TwinLength(i, t));
                    }
                }
                None => {
                    if lengths[i] != f64::INFINITY {
                        return Err(RibbonError::BadLength(i, lengths[i]));
                    }
                }
            }
        }
        for (v, rot) in rotations.iter_mut().enumerate() {
            if rot.is_empty() {
                return Err(RibbonError::IsolatedVertex(v));
            }
            rot.sort_by_key(|&h| half_edges[h].cyclic_pos);
            if rot.iter().enumerate().any(|(k, &h)| half_edges[h].cyclic_pos != k) {
                return Err(RibbonError::BadRotation(v, rot.len()));
            }
        }
        Ok(MetricRibbonGraph { vertices, half_edges, lengths, rotations })
    }

    /// Builds a graph from per-vertex counterclockwise lists of half-edge ids.
    pub fn from_rotations(
        rotations: &[Vec<usize>],
        twins: &[Option<usize>],
        lengths: &[f64],
    ) -> Result<Self, RibbonError> {
        let n = twins.len();
        let mut hs = vec![HalfEdge { id: 0, vertex: usize::MAX, cyclic_pos: 0, twin: None }; n];
        for (v, rot) in rotations.iter().enumerate() {
            for (k, &h) in rot.iter().enumerate() {
                if h >= n {
                    return Err(RibbonError::BadId(h));
                }
                hs[h] = HalfEdge { id: h, vertex: v, cyclic_pos: k, twin: twins[h] };
            }
        }
        if let Some(h) = hs.iter().position(|h| h.vertex == usize::MAX) {
            return Err(RibbonError::BadVertex(h, usize::MAX));
        }
        Self::new(rotations.len(), hs, lengths.to_vec())
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotations[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotations[v].len()
    }

    pub fn is_ray(&self, h: usize) -> bool {
        self.half_edges[h].twin.is_none()
    }

    pub fn cyclic_next(&self, h: usize) -> usize {
        let e = &self.half_edges[h];
        let rot = &self.rotations[e.vertex];
        rot[(e.cyclic_pos + 1) % rot.len()]
    }

    pub fn cyclic_prev(&self, h: usize) -> usize {
        let e = &self.half_edges[h];
        let rot = &self.rotations[e.vertex];
        rot[(e.cyclic_pos + rot.len() - 1) % rot.len()]
    }

    pub fn rays(&self) -> Vec<usize> {
        (0..self.half_edges.len()).filter(|&h| self.is_ray(h)).collect()
    }

    /// Number of compact edges (twin pairs).
    pub fn compact_edges(&self) -> usize {
        self.half_edges.iter().filter(|h| h.twin.is_some()).count() / 2
    }

    pub fn total_compact_length(&self) -> f64 {
        (0..self.half_edges.len())
            .filter(|&h| !self.is_ray(h))
            .map(|h| self.lengths[h])
            .sum::<f64>()
            / 2.0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.compact_edges() as i64
    }

    /// Splits the boundary walk into lines (ray to ray) and closed cycles.
    pub fn boundary(&self) -> Boundary {
        let n = self.half_edges.len();
        let mut seen = vec![false; n];
        let mut out = Boundary::default();
        for r in self.rays() {
            let mut walk = Vec::new();
            let mut length = 0.0;
            let mut h = self.cyclic_next(r);
            while let Some(t) = self.half_edges[h].twin {
                seen[h] = true;
                walk.push(h);
                length += self.lengths[h];
                h = self.cyclic_next(t);
            }
            out.lines.push(Line { incoming: r, walk, outgoing: h, length });
        }
        for start in 0..n {
            if seen[start] || self.is_ray(start) {
                continue;
            }
            let mut walk = Vec::new();
            let mut length = 0.0;
            let mut h = start;
            loop {
                seen[h] = true;
                walk.push(h);
                length += self.lengths[h];
                h = self.cyclic_next(self.half_edges[h].twin.expect("cycle edge"));
                if h == start {
                    break;
                }
            }
            out.cycles.push(Cycle { walk, length });
        }
        out
    }

    /// Connected components as lists of vertices, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.vertices];
        let mut out = Vec::new();
        for s in 0..self.vertices {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            let mut verts = Vec::new();
            comp[s] = id;
            while let Some(v) = stack.pop() {
                verts.push(v);
                for &h in &self.rotations[v] {
                    if let Some(t) = self.half_edges[h].twin {
                        let w = self.half_edges[t].vertex;
                        if comp[w] == usize::MAX {
                            comp[w] = id;
                            stack.push(w);
                        }
                    }
                }
            }
            verts.sort_unstable();
            out.push(verts);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.ribbon/1",
            "vertices": self.vertices,
            "half_edges": self.half_edges.iter().map(|h| json!({
                "id": h.id, "vertex": h.vertex, "cyclic_pos": h.cyclic_pos, "twin": h.twin,
            })).collect::<Vec<_>>(),
            "lengths": self.lengths.iter().map(|&l| num(l)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, String> {
        crate::json::check_schema(v, "teichlab.ribbon")?;
        #[derive(Deserialize)]
        struct He {
            id: usize,
            vertex: usize,
            cyclic_pos: usize,
            twin: Option<usize>,
        }
        #[derive(Deserialize)]
        struct File {
            vertices: usize,
            half_edges: Vec<He>,
            lengths: Vec<Value>,
        }
        let f: File = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        let mut lengths = Vec::with_capacity(f.lengths.len());
        for (i, l) in f.lengths.iter().enumerate() {
            if l.as_str().map(str::trim) == Some("inf") {
                lengths.push(f64::INFINITY);
            } else {
                let d: Decimal = serde_json::from_value(l.clone()).map_err(|e| format!("field `lengths[{i}]`: {e}"))?;
                lengths.push(d.to_f64());
            }
        }
        let hs = f
            .half_edges
            .into_iter()
            .map(|h| HalfEdge { id: h.id, vertex: h.vertex, cyclic_pos: h.cyclic_pos, twin: h.twin })
            .collect();
        Self::new(f.vertices, hs, lengths).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsoError {
    #[error("no ribbon-graph isomorphism between the compact parts")]
    NoIsomorphism,
    #[error("edge {edge}: length {expected} expected, {found} found")]
    LengthMismatch { edge: usize, expected: f64, found: f64 },
}

/// Finds a map from the half-edges of `a` into those of `b` that preserves
/// vertices, cyclic order and twins. Rays of `a` may map to any half-edge of
/// `b`; finite edges must map to finite edges of equal length (relative `tol`).
pub fn find_isomorphism(a: &MetricRibbonGraph, b: &MetricRibbonGraph, tol: f64) -> Result<Vec<usize>, IsoError> {
    let mut map = vec![usize::MAX; a.half_edges.len()];
    let mut used = vec![false; b.half_edges.len()];
    let mut first_mismatch: Option<IsoError> = None;
    for comp in a.components() {
        let root = a.rotation(comp[0])[0];
        let mut found = false;
        for cand in 0..b.half_edges.len() {
            if used[cand] {
                continue;
            }
            let Some(m) = extend(a, b, root, cand, &used) else { continue };
            match length_check(a, b, &m, tol) {
                Ok(()) => {
                    for (h, &t) in m.iter().enumerate() {
                        if t != usize::MAX {
                            map[h] = t;
                            used[t] = true;
                        }
                    }
                    found = true;
                    break;
                }
                Err(e) => {
                    first_mismatch.get_or_insert(e);
                }
            }
        }
        if !found {
            return Err(first_mismatch.unwrap_or(IsoError::NoIsomorphism));
        }
    }
    Ok(map)
}

fn extend(a: &MetricRibbonGraph, b: &MetricRibbonGraph, root: usize, image: usize, used: &[bool]) -> Option<Vec<usize>> {
    let mut m = vec![usize::MAX; a.half_edges.len()];
    let mut vmap = vec![usize::MAX; a.vertices];
    let mut stack = vec![(root, image)];
    while let Some((h, t)) = stack.pop() {
        if m[h] != usize::MAX {
            if m[h] != t {
                return None;
            }
            continue;
        }
        if used[t] || m.contains(&t) {
            return None;
        }
        let (va, vb) = (a.half_edges[h].vertex, b.half_edges[t].vertex);
        if vmap[va] == usize::MAX {
            if a.degree(va) != b.degree(vb) || vmap.contains(&vb) {
                return None;
            }
            vmap[va] = vb;
        } else if vmap[va] != vb {
            return None;
        }
        m[h] = t;
        stack.push((a.cyclic_next(h), b.cyclic_next(t)));
        if let Some(ht) = a.half_edges[h].twin {
            let tt = b.half_edges[t].twin?;
            stack.push((ht, tt));
        }
    }
    Some(m)
}

fn length_check(a: &MetricRibbonGraph, b: &MetricRibbonGraph, m: &[usize], tol: f64) -> Result<(), IsoError> {
    for (h, &t) in m.iter().enumerate() {
        if t == usize::MAX || a.is_ray(h) {
            continue;
        }
        let (x, y) = (a.lengths[h], b.lengths[t]);
        if (x - y).abs() > tol * x.abs().max(1.0) {
            return Err(IsoError::LengthMismatch { edge: h, expected: x, found: y });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod() -> MetricRibbonGraph {
        MetricRibbonGraph::from_rotations(&[vec![0, 1, 2]], &[None, None, None], &[f64::INFINITY; 3]).unwrap()
    }

    #[test]
    fn tripod_has_three_lines_in_one_cycle() {
        let b = tripod().boundary();
        assert_eq!(b.lines.len(), 3);
        assert!(b.cycles.is_empty());
        for l in &b.lines {
            assert_eq!(l.outgoing, (l.incoming + 1) % 3);
            assert!(l.walk.is_empty());
        }
    }

    #[test]
    fn loop_gives_two_cycles() {
        let g = MetricRibbonGraph::from_rotations(&[vec![0, 1]], &[Some(1), Some(0)], &[2.5, 2.5]).unwrap();
        let b = g.boundary();
        assert!(b.lines.is_empty());
        assert_eq!(b.cycles.len(), 2);
        assert!(b.cycles.iter().all(|c| c.length == 2.5));
    }

    #[test]
    fn rejects_broken_twins_and_lengths() {
        let e = MetricRibbonGraph::from_rotations(&[vec![0, 1]], &[Some(1), None], &[1.0, f64::INFINITY]);
        assert_eq!(e.unwrap_err(), RibbonError::BadTwin(0));
        let e = MetricRibbonGraph::from_rotations(&[vec![0, 1]], &[Some(1), Some(0)], &[1.0, 1.5]);
        assert_eq!(e.unwrap_err(), RibbonError::TwinLength(0, 1));
        let e = MetricRibbonGraph::from_rotations(&[vec![0]], &[None], &[3.0]);
        assert_eq!(e.unwrap_err(), RibbonError::BadLength(0, 3.0));
    }

    #[test]
    fn json_round_trip() {
        let g = tripod();
        let back = MetricRibbonGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.half_edges, g.half_edges);
    }

    #[test]
    fn isomorphism_finds_rotated_labels_and_reports_lengths() {
        let a = MetricRibbonGraph::from_rotations(&[vec![0, 1, 2, 3]], &[Some(2), Some(3), Some(0), Some(1)], &[1.0, 2.0, 1.0, 2.0])
            .unwrap();
        let b = MetricRibbonGraph::from_rotations(&[vec![0, 1, 2, 3]], &[Some(2), Some(3), Some(0), Some(1)], &[2.0, 1.0, 2.0, 1.0])
            .unwrap();
        let m = find_isomorphism(&a, &b, 1e-9).unwrap();
        assert_eq!(m[0], 1);
        let c = MetricRibbonGraph::from_rotations(&[vec![0, 1, 2, 3]], &[Some(2), Some(3), Some(0), Some(1)], &[2.0, 1.5, 2.0, 1.5])
            .unwrap();
        assert!(matches!(find_isomorphism(&a, &c, 1e-9), Err(IsoError::LengthMismatch { .. })));
    }
}
