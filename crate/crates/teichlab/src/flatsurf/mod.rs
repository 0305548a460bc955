//! Half-translation surfaces as Euclidean polygons in canonical coordinates,
//! glued edge to edge by translations `ξ ↦ ξ + c` or half-turns `ξ ↦ −ξ + c`.
//!
//! Horizontal tracing runs in the coordinates the surface was built from; a
//! vertical stretch only records its factor, because horizontal leaves and
//! their lengths do not change under `(x, y) ↦ (x, ty)`.

mod graph;
mod neighborhood;
mod trace;

pub(crate) use graph::{gamma_pieces, vertical_crossing};
pub use graph::{critical_graph, cylinder_decomposition, CriticalGraph, CylinderError, FlatCylinder, Separatrix};
pub use neighborhood::{r_neighborhood, NeighborhoodPiece};
pub use trace::{trace_separatrix, SaddleConnection, TraceError, TraceOutcome, UnresolvedRay, UnresolvedReason};

use crate::json::{check_schema, num, Decimal};
use serde::Deserialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use thiserror::Error;

/// Snap radius for recognising arrival at a vertex.
pub const SNAP: f64 = 1e-9;
/// Relative tolerance for comparing float edge data.
pub const REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pt {
    pub x: f64,
    pub y: f64,
}

impl Pt {
    pub const fn new(x: f64, y: f64) -> Self {
        Pt { x, y }
    }
    pub fn sub(self, o: Pt) -> Pt {
        Pt::new(self.x - o.x, self.y - o.y)
    }
    pub fn add(self, o: Pt) -> Pt {
        Pt::new(self.x + o.x, self.y + o.y)
    }
    pub fn neg(self) -> Pt {
        Pt::new(-self.x, -self.y)
    }
    pub fn scale(self, s: f64) -> Pt {
        Pt::new(self.x * s, self.y * s)
    }
    pub fn cross(self, o: Pt) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn dot(self, o: Pt) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatPolygon {
    pub id: String,
    pub vertices: Vec<Pt>,
}

impl FlatPolygon {
    pub fn new(id: impl Into<String>, vertices: Vec<Pt>) -> Self {
        FlatPolygon { id: id.into(), vertices }
    }

    pub fn edge(&self, i: usize) -> (Pt, Pt) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_vec(&self, i: usize) -> Pt {
        let (a, b) = self.edge(i);
        b.sub(a)
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum::<f64>() / 2.0
    }

    /// Interior angle at vertex `i`, counterclockwise from the outgoing edge
    /// to the incoming one.
    pub fn corner_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let v = self.vertices[i];
        let a = self.vertices[(i + 1) % n].sub(v);
        let b = self.vertices[(i + n - 1) % n].sub(v);
        let mut t = a.cross(b).atan2(a.dot(b));
        if t <= 0.0 {
            t += 2.0 * PI;
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub poly: usize,
    pub edge: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GluingKind {
    Translation,
    HalfTurn,
}

impl GluingKind {
    pub fn name(self) -> &'static str {
        match self {
            GluingKind::Translation => "translation",
            GluingKind::HalfTurn => "halfturn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGluing {
    pub a: EdgeRef,
    pub b: EdgeRef,
    pub kind: GluingKind,
}

/// Polygon-gluing description, the input of [`build_surface`].
#[derive(Clone, Debug, Default)]
pub struct SurfaceSpec {
    pub polygons: Vec<FlatPolygon>,
    pub gluings: Vec<EdgeGluing>,
    /// Permit unglued edges (pieces of infinite or truncated surfaces).
    pub allow_boundary: bool,
    /// Extra vertices to treat as marked points even when their angle is 2π.
    pub marked: Vec<(usize, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("polygon {0}: fewer than three vertices")]
    TooFewVertices(String),
    #[error("polygon {0}: vertices are not in positive orientation")]
    NegativeOrientation(String),
    #[error("polygon {0}: edge {1} has zero length")]
    DegenerateEdge(String, usize),
    #[error("polygon {0}: edges {1} and {2} intersect")]
    NotSimple(String, usize, usize),
    #[error("gluing {0}: edge reference out of range")]
    BadEdgeRef(usize),
    #[error("edge ({0}, {1}) glued more than once")]
    EdgeGluedTwice(String, usize),
    #[error("edge ({0}, {1}) is unmatched")]
    UnmatchedEdge(String, usize),
    #[error("edge length mismatch: ({0}, {1}) has length {2}, ({3}, {4}) has length {5}")]
    EdgeLengthMismatch(String, usize, f64, String, usize, f64),
    #[error("edge vector mismatch for {kind} gluing of ({0}, {1}) and ({2}, {3})", kind = .4.name())]
    EdgeVectorMismatch(String, usize, String, usize, GluingKind),
    #[error("cone angle {0}π at vertex class {1} is not a multiple of π")]
    AngleNotMultiple(f64, usize),
    #[error("cone angle π at vertex class {0}: a pole, not allowed on a closed surface")]
    PoleAngle(usize),
    #[error("surface is not connected")]
    Disconnected,
    #[error("Euler characteristic {0} is inconsistent with an orientable surface")]
    BadEuler(i64),
    #[error("area must be positive")]
    NonPositiveArea,
    #[error("stretch factor must be positive, got {0}")]
    BadStretch(f64),
    #[error("{0}")]
    Schema(String),
}

/// One identified vertex of the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexClass {
    /// Corners `(polygon, vertex)` in counterclockwise order around the point,
    /// starting from the canonical corner.
    pub corners: Vec<(usize, usize)>,
    /// Rotation (0 or π) of each corner's frame relative to the first corner.
    pub flips: Vec<bool>,
    pub angle: f64,
    /// Total angle in units of π (rounded).
    pub angle_pi: i64,
    pub on_boundary: bool,
    pub marked: bool,
}

impl VertexClass {
    /// Zero order `k` for a cone angle `(k+2)π`.
    pub fn order(&self) -> i64 {
        self.angle_pi - 2
    }
    /// Belongs to Λ: a zero of the differential or an explicitly marked point.
    pub fn is_cone_point(&self) -> bool {
        !self.on_boundary && (self.angle_pi != 2 || self.marked)
    }
}

#[derive(Clone, Debug)]
pub struct HalfTranslationSurface {
    spec: SurfaceSpec,
    base: Vec<Vec<Pt>>,
    vscale: f64,
    partner: Vec<Vec<Option<(EdgeRef, GluingKind)>>>,
    class_of: Vec<Vec<usize>>,
    classes: Vec<VertexClass>,
    cone_points: Vec<usize>,
    genus: i64,
    boundary_components: usize,
    area: f64,
}

pub fn build_surface(spec: &SurfaceSpec) -> Result<HalfTranslationSurface, SurfaceError> {
    let base = spec.polygons.iter().map(|p| p.vertices.clone()).collect();
    build_with_base(spec.clone(), base, 1.0)
}

fn build_with_base(spec: SurfaceSpec, base: Vec<Vec<Pt>>, vscale: f64) -> Result<HalfTranslationSurface, SurfaceError> {
    for p in &spec.polygons {
        validate_polygon(p)?;
    }
    let np = spec.polygons.len();
    let mut partner: Vec<Vec<Option<(EdgeRef, GluingKind)>>> =
        spec.polygons.iter().map(|p| vec![None; p.vertices.len()]).collect();
    let name = |e: EdgeRef| spec.polygons[e.poly].id.clone();
    for (gi, g) in spec.gluings.iter().enumerate() {
        for e in [g.a, g.b] {
            if e.poly >= np || e.edge >= spec.polygons[e.poly].vertices.len() {
                return Err(SurfaceError::BadEdgeRef(gi));
            }
        }
        if g.a == g.b {
            return Err(SurfaceError::EdgeGluedTwice(name(g.a), g.a.edge));
        }
        for (e, f) in [(g.a, g.b), (g.b, g.a)] {
            if partner[e.poly][e.edge].is_some() {
                return Err(SurfaceError::EdgeGluedTwice(name(e), e.edge));
            }
            partner[e.poly][e.edge] = Some((f, g.kind));
        }
        let va = spec.polygons[g.a.poly].edge_vec(g.a.edge);
        let vb = spec.polygons[g.b.poly].edge_vec(g.b.edge);
        let (la, lb) = (va.norm(), vb.norm());
        if (la - lb).abs() > REL_TOL * la.max(lb) {
            return Err(SurfaceError::EdgeLengthMismatch(name(g.a), g.a.edge, la, name(g.b), g.b.edge, lb));
        }
        let d = match g.kind {
            GluingKind::Translation => va.add(vb),
            GluingKind::HalfTurn => va.sub(vb),
        };
        if d.norm() > REL_TOL * la.max(1.0) * 4.0 {
            return Err(SurfaceError::EdgeVectorMismatch(name(g.a), g.a.edge, name(g.b), g.b.edge, g.kind));
        }
    }
    let mut free_edges = 0usize;
    for (pi, row) in partner.iter().enumerate() {
        for (ei, p) in row.iter().enumerate() {
            if p.is_none() {
                if !spec.allow_boundary {
                    return Err(SurfaceError::UnmatchedEdge(spec.polygons[pi].id.clone(), ei));
                }
                free_edges += 1;
            }
        }
    }
    if !connected(&partner) {
        return Err(SurfaceError::Disconnected);
    }

    let polys: Vec<FlatPolygon> =
        base.iter().zip(&spec.polygons).map(|(b, p)| FlatPolygon::new(p.id.clone(), b.clone())).collect();
    let (class_of, mut classes) = vertex_classes(&polys, &partner)?;
    for &(p, v) in &spec.marked {
        if let Some(c) = class_of.get(p).and_then(|r| r.get(v)) {
            classes[*c].marked = true;
        }
    }
    if !spec.allow_boundary {
        if let Some(c) = classes.iter().position(|c| c.angle_pi < 2) {
            return Err(SurfaceError::PoleAngle(c));
        }
    }
    let boundary_components = count_boundary_cycles(&polys, &partner);
    let v = classes.len() as i64;
    let e = (spec.gluings.len() + free_edges) as i64;
    let f = np as i64;
    let chi = v - e + f;
    let twice_genus = 2 - chi - boundary_components as i64;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(SurfaceError::BadEuler(chi));
    }
    let genus = twice_genus / 2;
    if !spec.allow_boundary {
        let sum_k: i64 = classes.iter().map(VertexClass::order).sum();
        if sum_k != 4 * genus - 4 {
            return Err(SurfaceError::BadEuler(chi));
        }
    }
    let area: f64 = spec.polygons.iter().map(FlatPolygon::signed_area).sum();
    if area <= 0.0 {
        return Err(SurfaceError::NonPositiveArea);
    }
    let cone_points = (0..classes.len()).filter(|&c| classes[c].is_cone_point()).collect();
    Ok(HalfTranslationSurface {
        spec,
        base,
        vscale,
        partner,
        class_of,
        classes,
        cone_points,
        genus,
        boundary_components,
        area,
    })
}

fn validate_polygon(p: &FlatPolygon) -> Result<(), SurfaceError> {
    let n = p.vertices.len();
    if n < 3 {
        return Err(SurfaceError::TooFewVertices(p.id.clone()));
    }
    let scale = p.vertices.iter().map(|v| v.x.abs().max(v.y.abs())).fold(1.0, f64::max);
    for i in 0..n {
        if p.edge_vec(i).norm() <= REL_TOL * scale {
            return Err(SurfaceError::DegenerateEdge(p.id.clone(), i));
        }
    }
    if p.signed_area() <= 0.0 {
        return Err(SurfaceError::NegativeOrientation(p.id.clone()));
    }
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = p.edge(i);
            let (c, d) = p.edge(j);
            if segments_touch(a, b, c, d, 1e-12 * scale) {
                return Err(SurfaceError::NotSimple(p.id.clone(), i, j));
            }
        }
    }
    Ok(())
}

fn segments_touch(a: Pt, b: Pt, c: Pt, d: Pt, eps: f64) -> bool {
    let d1 = b.sub(a).cross(c.sub(a));
    let d2 = b.sub(a).cross(d.sub(a));
    let d3 = d.sub(c).cross(a.sub(c));
    let d4 = d.sub(c).cross(b.sub(c));
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)) {
        return true;
    }
    let on = |p: Pt, q: Pt, r: Pt, cr: f64| {
        cr.abs() <= eps
            && r.x >= p.x.min(q.x) - eps
            && r.x <= p.x.max(q.x) + eps
            && r.y >= p.y.min(q.y) - eps
            && r.y <= p.y.max(q.y) + eps
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

fn connected(partner: &[Vec<Option<(EdgeRef, GluingKind)>>]) -> bool {
    let n = partner.len();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(p) = stack.pop() {
        for (q, _) in partner[p].iter().flatten() {
            if !seen[q.poly] {
                seen[q.poly] = true;
                stack.push(q.poly);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Corner reached by rotating counterclockwise past the incoming edge.
fn ccw_corner(polys: &[FlatPolygon], partner: &[Vec<Option<(EdgeRef, GluingKind)>>], p: usize, v: usize) -> Option<(usize, usize, GluingKind)> {
    let n = polys[p].vertices.len();
    let (q, kind) = partner[p][(v + n - 1) % n]?;
    Some((q.poly, q.edge, kind))
}

/// Corner reached by rotating clockwise past the outgoing edge.
fn cw_corner(polys: &[FlatPolygon], partner: &[Vec<Option<(EdgeRef, GluingKind)>>], p: usize, v: usize) -> Option<(usize, usize, GluingKind)> {
    let (q, kind) = partner[p][v]?;
    let m = polys[q.poly].vertices.len();
    Some((q.poly, (q.edge + 1) % m, kind))
}

type Classes = (Vec<Vec<usize>>, Vec<VertexClass>);

fn vertex_classes(polys: &[FlatPolygon], partner: &[Vec<Option<(EdgeRef, GluingKind)>>]) -> Result<Classes, SurfaceError> {
    let mut class_of: Vec<Vec<usize>> = polys.iter().map(|p| vec![usize::MAX; p.vertices.len()]).collect();
    let mut classes = Vec::new();
    for p0 in 0..polys.len() {
        for v0 in 0..polys[p0].vertices.len() {
            if class_of[p0][v0] != usize::MAX {
                continue;
            }
            // Rewind clockwise to a boundary corner if there is one.
            let (mut p, mut v) = (p0, v0);
            let mut on_boundary = false;
            let mut steps = 0;
            loop {
                match cw_corner(polys, partner, p, v) {
                    None => {
                        on_boundary = true;
                        break;
                    }
                    Some((q, w, _)) => {
                        if (q, w) == (p0, v0) {
                            break;
                        }
                        (p, v) = (q, w);
                    }
                }
                steps += 1;
                if steps > 1_000_000 {
                    break;
                }
            }
            let start = if on_boundary { (p, v) } else { (p0, v0) };
            let mut corners = vec![start];
            let mut flips = vec![false];
            let (mut p, mut v, mut flip) = (start.0, start.1, false);
            while let Some((q, w, kind)) = ccw_corner(polys, partner, p, v) {
                if (q, w) == start {
                    break;
                }
                flip ^= kind == GluingKind::HalfTurn;
                corners.push((q, w));
                flips.push(flip);
                (p, v) = (q, w);
            }
            let id = classes.len();
            let mut angle = 0.0;
            for &(p, v) in &corners {
                class_of[p][v] = id;
                angle += polys[p].corner_angle(v);
            }
            let ratio = angle / PI;
            let angle_pi = ratio.round() as i64;
            if !on_boundary && (ratio - angle_pi as f64).abs() > 1e-9 * ratio.max(1.0) {
                return Err(SurfaceError::AngleNotMultiple(ratio, id));
            }
            classes.push(VertexClass { corners, flips, angle, angle_pi, on_boundary, marked: false });
        }
    }
    Ok((class_of, classes))
}

fn count_boundary_cycles(polys: &[FlatPolygon], partner: &[Vec<Option<(EdgeRef, GluingKind)>>]) -> usize {
    let mut seen: Vec<Vec<bool>> = polys.iter().map(|p| vec![false; p.vertices.len()]).collect();
    let mut count = 0;
    for p0 in 0..polys.len() {
        for e0 in 0..polys[p0].vertices.len() {
            if partner[p0][e0].is_some() || seen[p0][e0] {
                continue;
            }
            count += 1;
            let (mut p, mut e) = (p0, e0);
            loop {
                seen[p][e] = true;
                // From the end vertex of this free edge, rotate clockwise
                // until the next free edge leaving that point.
                let n = polys[p].vertices.len();
                let (mut q, mut w) = (p, (e + 1) % n);
                while let Some((q2, w2, _)) = cw_corner(polys, partner, q, w) {
                    (q, w) = (q2, w2);
                }
                (p, e) = (q, w);
                if seen[p][e] {
                    break;
                }
            }
        }
    }
    count
}

impl HalfTranslationSurface {
    /// Polygons in current (stretched) coordinates.
    pub fn polygons(&self) -> &[FlatPolygon] {
        &self.spec.polygons
    }
    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }
    pub fn gluings(&self) -> &[EdgeGluing] {
        &self.spec.gluings
    }
    pub fn partner(&self, p: usize, e: usize) -> Option<(EdgeRef, GluingKind)> {
        self.partner[p][e]
    }
    pub fn classes(&self) -> &[VertexClass] {
        &self.classes
    }
    pub fn class_of(&self, p: usize, v: usize) -> usize {
        self.class_of[p][v]
    }
    /// Vertex classes in Λ (zeros and marked points), in class order.
    pub fn cone_points(&self) -> &[usize] {
        &self.cone_points
    }
    /// Classes with cone angle different from 2π.
    pub fn singular_points(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&c| !self.classes[c].on_boundary && self.classes[c].angle_pi != 2).collect()
    }
    pub fn zero_orders(&self) -> Vec<i64> {
        self.singular_points().iter().map(|&c| self.classes[c].order()).collect()
    }
    pub fn genus(&self) -> i64 {
        self.genus
    }
    pub fn area(&self) -> f64 {
        self.area
    }
    pub fn is_closed(&self) -> bool {
        self.boundary_components == 0
    }
    pub fn boundary_components(&self) -> usize {
        self.boundary_components
    }
    /// Accumulated vertical stretch relative to the tracing frame.
    pub fn vertical_scale(&self) -> f64 {
        self.vscale
    }
    pub(crate) fn base(&self, p: usize) -> &[Pt] {
        &self.base[p]
    }

    /// Maps a base-frame point on edge `e` of polygon `p` into its partner's frame.
    pub(crate) fn transfer(&self, p: usize, e: usize, x: Pt) -> Option<(usize, usize, Pt, GluingKind)> {
        let (q, kind) = self.partner[p][e]?;
        let a = self.base[p][e];
        let m = self.base[q.poly].len();
        let b1 = self.base[q.poly][(q.edge + 1) % m];
        let y = match kind {
            GluingKind::Translation => x.add(b1.sub(a)),
            GluingKind::HalfTurn => x.neg().add(b1.add(a)),
        };
        Some((q.poly, q.edge, y, kind))
    }

    pub fn to_spec_json(&self) -> Value {
        spec_to_json(&self.spec)
    }

    pub fn report_json(&self) -> Value {
        let cps: Vec<Value> = self
            .singular_points()
            .iter()
            .map(|&c| {
                let cl = &self.classes[c];
                json!({
                    "class": c,
                    "angle_over_pi": cl.angle_pi,
                    "order": cl.order(),
                    "corners": cl.corners.iter().map(|&(p, v)| json!([self.spec.polygons[p].id, v])).collect::<Vec<_>>(),
                })
            })
            .collect();
        let orders = self.zero_orders();
        json!({
            "genus": self.genus,
            "area": num(self.area),
            "closed": self.is_closed(),
            "boundary_components": self.boundary_components,
            "vertex_classes": self.classes.len(),
            "cone_points": cps,
            "zero_orders": orders,
            "sum_orders": orders.iter().sum::<i64>(),
            "gauss_bonnet_ok": !self.is_closed() || orders.iter().sum::<i64>() == 4 * self.genus - 4,
            "vertical_scale": num(self.vscale),
        })
    }
}

/// Teichmüller stretch `(x, y) ↦ (x, t·y)`.
pub fn stretch(s: &HalfTranslationSurface, t: f64) -> Result<HalfTranslationSurface, SurfaceError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(SurfaceError::BadStretch(t));
    }
    let mut out = s.clone();
    for p in &mut out.spec.polygons {
        for v in &mut p.vertices {
            v.y *= t;
        }
    }
    out.vscale = s.vscale * t;
    out.area = out.spec.polygons.iter().map(FlatPolygon::signed_area).sum();
    Ok(out)
}

pub fn spec_to_json(spec: &SurfaceSpec) -> Value {
    let polys: Vec<Value> = spec
        .polygons
        .iter()
        .map(|p| {
            json!({
                "id": p.id,
                "vertices": p.vertices.iter().map(|v| json!([num(v.x), num(v.y)])).collect::<Vec<_>>(),
            })
        })
        .collect();
    let glue: Vec<Value> = spec
        .gluings
        .iter()
        .map(|g| {
            json!({
                "a": [spec.polygons[g.a.poly].id, g.a.edge],
                "b": [spec.polygons[g.b.poly].id, g.b.edge],
                "kind": g.kind.name(),
            })
        })
        .collect();
    let mut v = json!({ "schema": "teichlab.surface/1", "polygons": polys, "gluings": glue });
    if spec.allow_boundary {
        v["allow_boundary"] = json!(true);
    }
    if !spec.marked.is_empty() {
        v["marked"] = json!(spec.marked.iter().map(|&(p, k)| json!([spec.polygons[p].id, k])).collect::<Vec<_>>());
    }
    v
}

pub fn spec_from_json(v: &Value) -> Result<SurfaceSpec, SurfaceError> {
    check_schema(v, "teichlab.surface").map_err(SurfaceError::Schema)?;
    #[derive(Deserialize)]
    struct Poly {
        id: Value,
        vertices: Vec<(Decimal, Decimal)>,
    }
    #[derive(Deserialize)]
    struct Glue {
        a: (Value, usize),
        b: (Value, usize),
        kind: String,
    }
    #[derive(Deserialize)]
    struct File {
        polygons: Vec<Poly>,
        gluings: Vec<Glue>,
        #[serde(default)]
        allow_boundary: bool,
        #[serde(default)]
        marked: Vec<(Value, usize)>,
    }
    let f: File = serde_json::from_value(v.clone()).map_err(|e| SurfaceError::Schema(e.to_string()))?;
    let label = |x: &Value| match x {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let polygons: Vec<FlatPolygon> = f
        .polygons
        .iter()
        .map(|p| FlatPolygon::new(label(&p.id), p.vertices.iter().map(|(x, y)| Pt::new(x.to_f64(), y.to_f64())).collect()))
        .collect();
    let find = |x: &Value, field: &str| {
        let l = label(x);
        polygons
            .iter()
            .position(|p| p.id == l)
            .ok_or_else(|| SurfaceError::Schema(format!("field `{field}`: unknown polygon id `{l}`")))
    };
    let mut gluings = Vec::new();
    for (i, g) in f.gluings.iter().enumerate() {
        let kind = match g.kind.as_str() {
            "translation" => GluingKind::Translation,
            "halfturn" => GluingKind::HalfTurn,
            k => return Err(SurfaceError::Schema(format!("field `gluings[{i}].kind`: unknown kind `{k}`"))),
        };
        gluings.push(EdgeGluing {
            a: EdgeRef { poly: find(&g.a.0, &format!("gluings[{i}].a"))?, edge: g.a.1 },
            b: EdgeRef { poly: find(&g.b.0, &format!("gluings[{i}].b"))?, edge: g.b.1 },
            kind,
        });
    }
    let mut marked = Vec::new();
    for (i, (p, k)) in f.marked.iter().enumerate() {
        marked.push((find(p, &format!("marked[{i}]"))?, *k));
    }
    Ok(SurfaceSpec { polygons, gluings, allow_boundary: f.allow_boundary, marked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn square_torus_spec(side_b: f64) -> SurfaceSpec {
        let sq = FlatPolygon::new("sq", vec![Pt::new(0.0, 0.0), Pt::new(1.0, 0.0), Pt::new(1.0, side_b), Pt::new(0.0, 1.0)]);
        SurfaceSpec {
            polygons: vec![sq],
            gluings: vec![
                EdgeGluing { a: EdgeRef { poly: 0, edge: 0 }, b: EdgeRef { poly: 0, edge: 2 }, kind: GluingKind::Translation },
                EdgeGluing { a: EdgeRef { poly: 0, edge: 1 }, b: EdgeRef { poly: 0, edge: 3 }, kind: GluingKind::HalfTurn },
            ],
            ..Default::default()
        }
    }

    #[test]
    fn unit_square_torus() {
        let s = build_surface(&catalog::square_torus()).unwrap();
        assert_eq!(s.genus(), 1);
        assert_eq!(s.area(), 1.0);
        assert!(s.singular_points().is_empty());
        assert!(s.cone_points().is_empty());
        assert_eq!(s.classes().len(), 1);
        assert_eq!(s.classes()[0].angle_pi, 2);
    }

    #[test]
    fn mismatched_half_turn_lengths_are_rejected() {
        let e = build_surface(&square_torus_spec(1.1)).unwrap_err();
        assert!(matches!(e, SurfaceError::EdgeLengthMismatch(..)), "{e}");
        assert!(e.to_string().contains("edge length mismatch"));
    }

    #[test]
    fn unmatched_and_reversed_polygons_are_rejected() {
        let mut spec = catalog::square_torus();
        spec.gluings.pop();
        assert!(matches!(build_surface(&spec), Err(SurfaceError::UnmatchedEdge(..))));
        let mut spec = catalog::square_torus();
        spec.polygons[0].vertices.reverse();
        assert!(matches!(build_surface(&spec), Err(SurfaceError::NegativeOrientation(_))));
    }

    #[test]
    fn stretch_of_unit_torus() {
        let s = build_surface(&catalog::square_torus()).unwrap();
        let t = stretch(&s, 3.0).unwrap();
        let v = &t.polygons()[0].vertices;
        assert_eq!(v, &vec![Pt::new(0.0, 0.0), Pt::new(1.0, 0.0), Pt::new(1.0, 3.0), Pt::new(0.0, 3.0)]);
        assert_eq!(t.area(), 3.0);
        let same = stretch(&s, 1.0).unwrap();
        assert_eq!(same.polygons(), s.polygons());
        assert!(stretch(&s, 0.0).is_err());
        assert!(stretch(&s, -1.0).is_err());
    }

    #[test]
    fn slit_torus_is_genus_two_with_one_zero_of_order_four() {
        let s = build_surface(&catalog::slit_torus()).unwrap();
        assert_eq!(s.genus(), 2);
        assert_eq!(s.zero_orders(), vec![4]);
    }

    #[test]
    fn pillowcase_poles_are_rejected_on_closed_surfaces() {
        let p = FlatPolygon::new(
            "p",
            vec![Pt::new(0.0, 0.0), Pt::new(1.0, 0.0), Pt::new(2.0, 0.0), Pt::new(2.0, 1.0), Pt::new(1.0, 1.0), Pt::new(0.0, 1.0)],
        );
        let g = |a, b, kind| EdgeGluing { a: EdgeRef { poly: 0, edge: a }, b: EdgeRef { poly: 0, edge: b }, kind };
        let spec = SurfaceSpec {
            polygons: vec![p],
            gluings: vec![g(0, 1, GluingKind::HalfTurn), g(3, 4, GluingKind::HalfTurn), g(2, 5, GluingKind::Translation)],
            ..Default::default()
        };
        assert!(matches!(build_surface(&spec), Err(SurfaceError::PoleAngle(_))));
        let mut open = spec.clone();
        open.allow_boundary = true;
        assert!(build_surface(&open).is_ok());
    }

    #[test]
    fn json_round_trip_preserves_surface() {
        let spec = catalog::slit_torus();
        let v = spec_to_json(&spec);
        let back = spec_from_json(&serde_json::from_str(&crate::json::to_canonical_string(&v)).unwrap()).unwrap();
        assert_eq!(back.polygons, spec.polygons);
        assert_eq!(back.gluings, spec.gluings);
    }
}
