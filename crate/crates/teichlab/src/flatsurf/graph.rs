//! Critical graphs and the cylinder decomposition of Strebel differentials.

use super::trace::{separatrix_directions, shoot, Seg, ShotEnd};
use super::{trace_separatrix, HalfTranslationSurface, Pt, SaddleConnection, TraceError, TraceOutcome, UnresolvedReason, SNAP};
use crate::json::num;
use crate::ribbon::MetricRibbonGraph;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Separatrix {
    pub class: usize,
    pub direction: usize,
    pub outcome: TraceOutcome,
}

impl Separatrix {
    pub fn segments(&self) -> &[Seg] {
        match &self.outcome {
            TraceOutcome::Saddle(s) => &s.segments,
            TraceOutcome::Unresolved(u) => &u.segments,
        }
    }
}

/// Horizontal critical graph: one ribbon vertex per point of Λ, one
/// half-edge per horizontal direction there (in counterclockwise order).
#[derive(Clone, Debug)]
pub struct CriticalGraph {
    pub graph: MetricRibbonGraph,
    /// Vertex class of each ribbon vertex.
    pub vertex_class: Vec<usize>,
    /// Trace result for each half-edge.
    pub separatrices: Vec<Separatrix>,
}

impl CriticalGraph {
    pub fn is_compact(&self) -> bool {
        self.graph.rays().is_empty()
    }

    /// One representative per saddle connection (the half-edge with the smaller id).
    pub fn saddle_connections(&self) -> Vec<(usize, &SaddleConnection)> {
        (0..self.separatrices.len())
            .filter_map(|h| match (&self.separatrices[h].outcome, self.graph.half_edges[h].twin) {
                (TraceOutcome::Saddle(sc), Some(t)) if h < t => Some((h, sc)),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self, s: &HalfTranslationSurface) -> Value {
        let verts: Vec<Value> = self
            .vertex_class
            .iter()
            .enumerate()
            .map(|(v, &c)| {
                let cl = &s.classes()[c];
                json!({ "class": c, "order": cl.order(), "marked": cl.marked, "directions": self.graph.degree(v) })
            })
            .collect();
        let saddles: Vec<Value> = self
            .saddle_connections()
            .iter()
            .map(|(h, sc)| {
                json!({
                    "half_edges": [h, self.graph.half_edges[*h].twin],
                    "from": [sc.from.0, sc.from.1],
                    "to": [sc.to.0, sc.to.1],
                    "length": num(sc.length),
                    "holonomy": [num(sc.holonomy.x), num(sc.holonomy.y)],
                })
            })
            .collect();
        let rays: Vec<Value> = self
            .separatrices
            .iter()
            .enumerate()
            .filter_map(|(h, sp)| match &sp.outcome {
                TraceOutcome::Unresolved(u) => Some(json!({
                    "half_edge": h,
                    "from": [u.from.0, u.from.1],
                    "reason": match u.reason {
                        UnresolvedReason::HitBoundary => "boundary",
                        UnresolvedReason::LengthBudget => "budget",
                    },
                    "traced_length": num(u.length),
                })),
                TraceOutcome::Saddle(_) => None,
            })
            .collect();
        json!({
            "vertices": verts,
            "saddle_connections": saddles,
            "rays": rays,
            "compact": self.is_compact(),
            "euler_characteristic": self.graph.euler_characteristic(),
            "ribbon": self.graph.to_json(),
        })
    }
}

pub fn critical_graph(s: &HalfTranslationSurface, budget: f64) -> Result<CriticalGraph, TraceError> {
    if !(budget > 0.0) {
        return Err(TraceError::BadBudget(budget));
    }
    let vertex_class: Vec<usize> = s.cone_points().to_vec();
    let mut first = vec![0usize; s.classes().len()];
    let mut rotations = Vec::new();
    let mut separatrices = Vec::new();
    for &c in &vertex_class {
        first[c] = separatrices.len();
        let n = separatrix_directions(s, c).len();
        rotations.push((separatrices.len()..separatrices.len() + n).collect::<Vec<_>>());
        for i in 0..n {
            separatrices.push(Separatrix { class: c, direction: i, outcome: trace_separatrix(s, c, i, budget)? });
        }
    }
    let n = separatrices.len();
    let mut twins: Vec<Option<usize>> = vec![None; n];
    let mut lengths = vec![f64::INFINITY; n];
    for h in 0..n {
        if twins[h].is_some() {
            continue;
        }
        if let TraceOutcome::Saddle(sc) = &separatrices[h].outcome {
            let t = first[sc.to.0] + sc.to.1;
            if t != h && twins[t].is_none() {
                twins[h] = Some(t);
                twins[t] = Some(h);
                lengths[h] = sc.length;
                lengths[t] = sc.length;
            }
        }
    }
    // A saddle that could not be paired is kept as a ray.
    for h in 0..n {
        if twins[h].is_none() {
            lengths[h] = f64::INFINITY;
        }
    }
    let graph = MetricRibbonGraph::from_rotations(&rotations, &twins, &lengths).expect("traced graph is well formed");
    Ok(CriticalGraph { graph, vertex_class, separatrices })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatCylinder {
    pub circumference: f64,
    pub height: f64,
    pub modulus: f64,
    /// Boundary walks (half-edge ids of the critical graph), one per side.
    pub boundary: [Vec<usize>; 2],
}

impl FlatCylinder {
    fn new(circumference: f64, height: f64, boundary: [Vec<usize>; 2]) -> Self {
        FlatCylinder { circumference, height, modulus: height / circumference, boundary }
    }

    pub fn area(&self) -> f64 {
        self.circumference * self.height
    }

    /// Extremal length of the core curve.
    pub fn core_extremal_length(&self) -> f64 {
        1.0 / self.modulus
    }

    pub fn to_json(&self) -> Value {
        json!({
            "circumference": num(self.circumference),
            "height": num(self.height),
            "modulus": num(self.modulus),
            "core_extremal_length": num(self.core_extremal_length()),
            "boundary": [self.boundary[0], self.boundary[1]],
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CylinderError {
    #[error("not Strebel: {0} separatrices unresolved")]
    NotStrebel(usize),
    #[error("surface has boundary")]
    HasBoundary,
    #[error("{0}")]
    Trace(#[from] TraceError),
    #[error("cylinder geometry inconsistent: {0}")]
    Geometry(String),
}

/// Γ pieces per polygon in tracing coordinates, tagged by half-edge.
pub(crate) fn gamma_pieces(s: &HalfTranslationSurface, cg: &CriticalGraph, include_rays: bool) -> Vec<Vec<(Pt, Pt, usize)>> {
    let mut out: Vec<Vec<(Pt, Pt, usize)>> = vec![Vec::new(); s.polygons().len()];
    let mut chosen: Vec<(usize, &[Seg])> = cg.saddle_connections().into_iter().map(|(h, sc)| (h, &sc.segments[..])).collect();
    if include_rays {
        for h in cg.graph.rays() {
            chosen.push((h, cg.separatrices[h].segments()));
        }
    }
    for (h, segs) in chosen {
        for seg in segs {
            out[seg.poly].push((seg.a, seg.b, h));
            // Copy pieces that run along a glued edge to the other side.
            let pts = s.base(seg.poly);
            let n = pts.len();
            for e in 0..n {
                let (a, w) = (pts[e], pts[(e + 1) % n].sub(pts[e]));
                let len = w.norm();
                let on_edge = |x: Pt| {
                    let along = w.dot(x.sub(a)) / len;
                    (w.cross(x.sub(a)) / len).abs() < SNAP && along > -SNAP && along < len + SNAP
                };
                if on_edge(seg.a) && on_edge(seg.b) {
                    if let (Some((q, _, ya, _)), Some((_, _, yb, _))) = (s.transfer(seg.poly, e, seg.a), s.transfer(seg.poly, e, seg.b)) {
                        out[q].push((ya, yb, h));
                    }
                }
            }
        }
    }
    out
}

/// Shoots a vertical ray from the longest piece of separatrix `h` into the
/// side on its right (or left) until it meets a piece of Γ. Returns the
/// separatrix hit, whether it was reached from its right side, and the
/// distance in tracing units.
pub(crate) fn vertical_crossing(
    s: &HalfTranslationSurface,
    cg: &CriticalGraph,
    pieces: &[Vec<(Pt, Pt, usize)>],
    h: usize,
    to_right: bool,
    limit: f64,
) -> Option<(usize, bool, f64)> {
    let seg = *cg.separatrices[h]
        .segments()
        .iter()
        .max_by(|a, b| a.b.sub(a.a).norm().total_cmp(&b.b.sub(b.a).norm()))?;
    let d = seg.b.sub(seg.a).scale(1.0 / seg.b.sub(seg.a).norm());
    let dir = if to_right { Pt::new(d.y, -d.x) } else { Pt::new(-d.y, d.x) };
    for frac in [0.5, 0.381966, 0.618034, 0.25, 0.75, 0.1234] {
        let start = seg.a.add(seg.b.sub(seg.a).scale(frac));
        let stop = |p: usize, x: Pt, y: Pt| -> Option<(f64, usize)> {
            let r = y.sub(x);
            let rl = r.norm();
            let mut best: Option<(f64, usize)> = None;
            for &(a, b, g) in &pieces[p] {
                let w = b.sub(a);
                let den = r.cross(w);
                if den.abs() < 1e-14 * rl * w.norm() {
                    continue;
                }
                let t = a.sub(x).cross(w) / den;
                let sigma = a.sub(x).cross(r) / den;
                if t * rl <= 1e-10 || t > 1.0 + 1e-12 || !(-1e-12..=1.0 + 1e-12).contains(&sigma) {
                    continue;
                }
                if best.map_or(true, |(bt, _)| t * rl < bt) {
                    let dg = w.scale(1.0 / w.norm());
                    let right = Pt::new(dg.y, -dg.x);
                    best = Some((t * rl, 2 * g + usize::from(r.dot(right) < 0.0)));
                }
            }
            best
        };
        let shot = shoot(s, seg.poly, start, dir, limit, &stop);
        if let ShotEnd::Stopped { tag, poly, at } = shot.end {
            let near_cone = s
                .base(poly)
                .iter()
                .enumerate()
                .any(|(v, &x)| x.sub(at).norm() < 1e-7 && s.classes()[s.class_of(poly, v)].is_cone_point());
            if !near_cone {
                return Some((tag / 2, tag % 2 == 1, shot.length));
            }
        }
    }
    None
}

pub fn cylinder_decomposition(s: &HalfTranslationSurface, budget: f64) -> Result<Vec<FlatCylinder>, CylinderError> {
    if !s.is_closed() {
        return Err(CylinderError::HasBoundary);
    }
    if s.cone_points().is_empty() {
        return torus_cylinder(s, budget);
    }
    let cg = critical_graph(s, budget)?;
    let rays = cg.graph.rays().len();
    if rays > 0 {
        return Err(CylinderError::NotStrebel(rays));
    }
    let faces = cg.graph.boundary().cycles;
    let mut face_of = vec![usize::MAX; cg.graph.half_edges.len()];
    for (f, c) in faces.iter().enumerate() {
        for &h in &c.walk {
            face_of[h] = f;
        }
    }
    let pieces = gamma_pieces(s, &cg, false);
    let twin = |h: usize| cg.graph.half_edges[h].twin.expect("compact graph");
    let limit = 10.0 * s.area() / s.vertical_scale() / faces.iter().map(|f| f.length).fold(f64::INFINITY, f64::min) + 10.0;
    let mut across = Vec::with_capacity(faces.len());
    for face in &faces {
        let (g, from_right, height) = vertical_crossing(s, &cg, &pieces, face.walk[0], true, limit)
            .ok_or_else(|| CylinderError::Geometry("vertical ray did not cross a cylinder".into()))?;
        across.push((face_of[if from_right { g } else { twin(g) }], height));
    }
    let mut cylinders = Vec::new();
    for (f, &(g, height)) in across.iter().enumerate() {
        if across[g].0 != f {
            return Err(CylinderError::Geometry(format!("faces {f} and {g} do not face each other")));
        }
        let (cf, cgl) = (faces[f].length, faces[g].length);
        if (cf - cgl).abs() > 1e-9 * cf.max(1.0) || (height - across[g].1).abs() > 1e-9 * height.max(1.0) {
            return Err(CylinderError::Geometry(format!("faces {f} and {g} bound cylinders of different shape")));
        }
        if f < g {
            cylinders.push(FlatCylinder::new(cf, height * s.vertical_scale(), [faces[f].walk.clone(), faces[g].walk.clone()]));
        }
    }
    let total: f64 = cylinders.iter().map(FlatCylinder::area).sum();
    if (total - s.area()).abs() > 1e-9 * s.area() {
        return Err(CylinderError::Geometry(format!("cylinder areas sum to {total}, surface area is {}", s.area())));
    }
    Ok(cylinders)
}

/// A flat torus without marked points: one horizontal cylinder if the leaf
/// through an interior point closes up.
fn torus_cylinder(s: &HalfTranslationSurface, budget: f64) -> Result<Vec<FlatCylinder>, CylinderError> {
    let pts = s.base(0);
    let x0 = pts[0].add(pts[1]).add(pts[2]).scale(1.0 / 3.0);
    let d = Pt::new(1.0, 0.0);
    let stop = |p: usize, x: Pt, y: Pt| -> Option<(f64, usize)> {
        if p != 0 || (x0.y - x.y).abs() > SNAP {
            return None;
        }
        let t = (x0.x - x.x) * (y.x - x.x).signum();
        let span = (y.x - x.x).abs();
        (t > 1e-10 && t <= span + 1e-12).then_some((t, 0))
    };
    let shot = shoot(s, 0, x0, d, budget, &stop);
    match shot.end {
        ShotEnd::Stopped { .. } => {
            let c = shot.length;
            Ok(vec![FlatCylinder::new(c, s.area() / c, [Vec::new(), Vec::new()])])
        }
        _ => Err(CylinderError::NotStrebel(1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::flatsurf::{build_surface, stretch};

    #[test]
    fn square_torus_cylinder() {
        let s = build_surface(&catalog::square_torus()).unwrap();
        let c = cylinder_decomposition(&s, 10.0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].circumference, c[0].height, c[0].modulus), (1.0, 1.0, 1.0));
        for t in [0.5, 2.0, 10.0] {
            let c = cylinder_decomposition(&stretch(&s, t).unwrap(), 10.0).unwrap();
            assert!((c[0].modulus - t).abs() < 1e-12 * t);
        }
    }

    #[test]
    fn power_chart_graph_is_a_star_of_rays() {
        let s = build_surface(&catalog::power_chart(4, 2.0)).unwrap();
        let cg = critical_graph(&s, 10.0).unwrap();
        assert_eq!(cg.graph.vertices, 1);
        assert_eq!(cg.graph.rays().len(), 6);
        assert_eq!(cg.graph.compact_edges(), 0);
    }

    #[test]
    fn strebel_surfaces_decompose() {
        let a = build_surface(&catalog::strebel_one_cylinder()).unwrap();
        let cg = critical_graph(&a, 50.0).unwrap();
        assert!(cg.is_compact());
        assert_eq!(cg.graph.compact_edges(), 3);
        assert_eq!(cg.graph.boundary().cycles.len(), 2);
        let cyl = cylinder_decomposition(&a, 50.0).unwrap();
        assert_eq!(cyl.len(), 1);
        assert!((cyl[0].circumference - 3.0).abs() < 1e-12 && (cyl[0].height - 1.0).abs() < 1e-12);

        let b = build_surface(&catalog::strebel_two_cylinders()).unwrap();
        let mut cyl = cylinder_decomposition(&b, 50.0).unwrap();
        cyl.sort_by(|x, y| x.circumference.total_cmp(&y.circumference));
        assert_eq!(cyl.len(), 2);
        assert!((cyl[0].circumference - 1.0).abs() < 1e-12 && (cyl[1].circumference - 2.0).abs() < 1e-12);
        assert!(cyl.iter().all(|c| (c.height - 1.0).abs() < 1e-12));
        let total: f64 = cyl.iter().map(FlatCylinder::area).sum();
        assert!((total - b.area()).abs() < 1e-12 * b.area());
    }

    #[test]
    fn stretched_strebel_moduli_scale() {
        let b = build_surface(&catalog::strebel_two_cylinders()).unwrap();
        let m0: Vec<f64> = cylinder_decomposition(&b, 50.0).unwrap().iter().map(|c| c.modulus).collect();
        let m7: Vec<f64> = cylinder_decomposition(&stretch(&b, 7.0).unwrap(), 50.0).unwrap().iter().map(|c| c.modulus).collect();
        for (a, b) in m0.iter().zip(&m7) {
            assert!((b / a - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn slit_torus_is_not_strebel() {
        let s = build_surface(&catalog::slit_torus()).unwrap();
        let cg = critical_graph(&s, 10.0).unwrap();
        assert_eq!(cg.graph.rays().len(), 2);
        assert_eq!(cg.graph.compact_edges(), 2);
        assert_eq!(cylinder_decomposition(&s, 10.0), Err(CylinderError::NotStrebel(2)));
    }
}
