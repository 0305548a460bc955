//! Half-plane structures: a metric ribbon graph with a Euclidean half-plane
//! glued to every boundary line and a half-infinite cylinder glued to every
//! closed boundary cycle. These are the conformal limits of Teichmüller rays.
//!
//! Each boundary line is placed in its own upper half-plane with the walk
//! running leftward, so the face is on the walk's right: the compact part
//! occupies `[0, ℓ]`, the incoming ray `[ℓ, ∞)` and the outgoing ray
//! `(−∞, 0]`. Neighbouring half-planes share a ray and are glued by the
//! half-turn `(x, y) ↦ (ℓ_B − x, −y)`.

mod embed;
mod truncate;

pub use embed::{embed_check, EmbedReport};
pub use truncate::{truncate, Staircase, Truncation, TruncationSpec};

use crate::flatsurf::SurfaceError;
use crate::json::num;
use crate::ribbon::{Boundary, MetricRibbonGraph};
use serde_json::{json, Value};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceRef {
    Line(usize),
    Cycle(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attachment {
    HalfPlane,
    Cylinder,
}

/// How boundary faces are filled: `Auto` puts half-planes on lines and
/// cylinders on cycles; `Explicit` lists one attachment per face, lines first.
#[derive(Clone, Debug, PartialEq)]
pub enum FacePolicy {
    Auto,
    Explicit(Vec<Attachment>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum EndKind {
    Planar { m: usize },
    Cylindrical { circumference: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct End {
    pub kind: EndKind,
    /// Faces of the end in cyclic order around the puncture.
    pub faces: Vec<FaceRef>,
    /// Compact boundary lengths of those faces.
    pub lengths: Vec<f64>,
    pub residue: f64,
    pub pole_order: usize,
    /// Index into [`HalfPlaneStructure::components`].
    pub component: usize,
}

impl End {
    /// A planar end with fewer than three half-planes (allowed as data).
    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, EndKind::Planar { m } if m < 3)
    }

    pub fn to_json(&self) -> Value {
        let faces: Vec<Value> = self
            .faces
            .iter()
            .map(|f| match f {
                FaceRef::Line(i) => json!({ "line": i }),
                FaceRef::Cycle(i) => json!({ "cycle": i }),
            })
            .collect();
        let mut v = json!({
            "faces": faces,
            "lengths": self.lengths.iter().map(|&l| num(l)).collect::<Vec<_>>(),
            "residue": num(self.residue),
            "pole_order": self.pole_order,
            "component": self.component,
        });
        match self.kind {
            EndKind::Planar { m } => {
                v["kind"] = json!("planar");
                v["m"] = json!(m);
                if m < 3 {
                    v["degenerate"] = json!(true);
                }
            }
            EndKind::Cylindrical { circumference } => {
                v["kind"] = json!("cylindrical");
                v["circumference"] = num(circumference);
            }
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub euler_characteristic: i64,
    pub ends: Vec<usize>,
    /// `None` when the Euler characteristic and end count do not fit a surface.
    pub genus: Option<i64>,
    pub total_length: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("face {0} is compact and cannot carry a half-plane")]
    CompactFaceAsHalfPlane(usize),
    #[error("face {0} has infinite rays and cannot carry a cylinder")]
    InfiniteFaceAsCylinder(usize),
    #[error("face policy lists {0} attachments for {1} faces")]
    PolicyLength(usize, usize),
    #[error("cut exits its half-plane: {0}")]
    CutOutside(String),
    #[error("truncation spec: {0}")]
    BadTruncation(String),
    #[error("truncated piece is not a valid surface: {0}")]
    Surface(#[from] SurfaceError),
    #[error("embedding mismatch: {0}")]
    EmbedMismatch(String),
    #[error("{0}")]
    Trace(String),
}

#[derive(Clone, Debug)]
pub struct HalfPlaneStructure {
    pub graph: MetricRibbonGraph,
    pub boundary: Boundary,
    pub attachments: Vec<(FaceRef, Attachment)>,
    pub ends: Vec<End>,
    pub components: Vec<Component>,
}

pub fn residue_of(kind: &EndKind, lengths: &[f64]) -> f64 {
    match kind {
        EndKind::Cylindrical { circumference } => *circumference,
        EndKind::Planar { m } if m % 2 == 1 => 0.0,
        EndKind::Planar { .. } => alternating_sum(lengths).abs(),
    }
}

pub(crate) fn alternating_sum(v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, &x)| if i % 2 == 0 { x } else { -x }).sum()
}

pub fn assemble_limit(graph: &MetricRibbonGraph, policy: &FacePolicy) -> Result<HalfPlaneStructure, LimitError> {
    let boundary = graph.boundary();
    let nl = boundary.lines.len();
    let nf = nl + boundary.cycles.len();
    let faces: Vec<FaceRef> = (0..nl).map(FaceRef::Line).chain((0..boundary.cycles.len()).map(FaceRef::Cycle)).collect();
    let attachments: Vec<(FaceRef, Attachment)> = match policy {
        FacePolicy::Auto => faces
            .iter()
            .map(|&f| (f, if matches!(f, FaceRef::Line(_)) { Attachment::HalfPlane } else { Attachment::Cylinder }))
            .collect(),
        FacePolicy::Explicit(list) => {
            if list.len() != nf {
                return Err(LimitError::PolicyLength(list.len(), nf));
            }
            for (i, (&f, &a)) in faces.iter().zip(list).enumerate() {
                match (f, a) {
                    (FaceRef::Cycle(_), Attachment::HalfPlane) => return Err(LimitError::CompactFaceAsHalfPlane(i)),
                    (FaceRef::Line(_), Attachment::Cylinder) => return Err(LimitError::InfiniteFaceAsCylinder(i)),
                    _ => {}
                }
            }
            faces.iter().copied().zip(list.iter().copied()).collect()
        }
    };

    let comps = graph.components();
    let mut comp_of = vec![0usize; graph.vertices];
    for (c, vs) in comps.iter().enumerate() {
        for &v in vs {
            comp_of[v] = c;
        }
    }
    let vertex_of = |h: usize| graph.half_edges[h].vertex;

    let mut ends = Vec::new();
    let by_incoming: HashMap<usize, usize> = boundary.lines.iter().enumerate().map(|(i, l)| (l.incoming, i)).collect();
    let mut seen = vec![false; nl];
    for start in 0..nl {
        if seen[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cyc.push(i);
            i = by_incoming[&boundary.lines[i].outgoing];
        }
        let lengths: Vec<f64> = cyc.iter().map(|&i| boundary.lines[i].length).collect();
        let kind = EndKind::Planar { m: cyc.len() };
        ends.push(End {
            residue: residue_of(&kind, &lengths),
            pole_order: cyc.len(),
            component: comp_of[vertex_of(boundary.lines[start].incoming)],
            faces: cyc.into_iter().map(FaceRef::Line).collect(),
            lengths,
            kind,
        });
    }
    for (j, c) in boundary.cycles.iter().enumerate() {
        let kind = EndKind::Cylindrical { circumference: c.length };
        ends.push(End {
            residue: residue_of(&kind, &[c.length]),
            pole_order: 2,
            component: comp_of[vertex_of(c.walk[0])],
            faces: vec![FaceRef::Cycle(j)],
            lengths: vec![c.length],
            kind,
        });
    }

    let mut components: Vec<Component> = comps
        .iter()
        .enumerate()
        .map(|(c, vs)| {
            let hs: Vec<usize> = (0..graph.half_edges.len()).filter(|&h| comp_of[vertex_of(h)] == c).collect();
            let edges = hs.iter().filter(|&&h| !graph.is_ray(h)).count() as i64 / 2;
            let chi = vs.len() as i64 - edges;
            let my_ends: Vec<usize> = (0..ends.len()).filter(|&e| ends[e].component == c).collect();
            let twice = 2 - chi - my_ends.len() as i64;
            let total_length = hs.iter().filter(|&&h| !graph.is_ray(h)).map(|&h| graph.lengths[h]).sum::<f64>() / 2.0;
            Component {
                vertices: vs.clone(),
                euler_characteristic: chi,
                ends: my_ends,
                genus: (twice >= 0 && twice % 2 == 0).then_some(twice / 2),
                total_length,
            }
        })
        .collect();
    // Canonical order: (genus, number of ends, total length).
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&components[a], &components[b]);
        (ca.genus, ca.ends.len())
            .cmp(&(cb.genus, cb.ends.len()))
            .then(ca.total_length.total_cmp(&cb.total_length))
            .then(ca.vertices.cmp(&cb.vertices))
    });
    let mut rank = vec![0; order.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    for e in &mut ends {
        e.component = rank[e.component];
    }
    components = order.iter().map(|&c| components[c].clone()).collect();

    Ok(HalfPlaneStructure { graph: graph.clone(), boundary, attachments, ends, components })
}

/// One end per puncture, with pole orders: `m` for a planar end with `m`
/// half-planes, 2 for a cylindrical end.
pub fn ends(hps: &HalfPlaneStructure) -> &[End] {
    &hps.ends
}

pub fn metric_residue(end: &End) -> f64 {
    residue_of(&end.kind, &end.lengths)
}

impl HalfPlaneStructure {
    pub fn to_json(&self) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|c| {
                json!({
                    "vertices": c.vertices,
                    "euler_characteristic": c.euler_characteristic,
                    "genus": c.genus,
                    "ends": c.ends,
                    "total_length": num(c.total_length),
                })
            })
            .collect();
        let lines: Vec<Value> = self
            .boundary
            .lines
            .iter()
            .map(|l| json!({ "incoming": l.incoming, "walk": l.walk, "outgoing": l.outgoing, "length": num(l.length) }))
            .collect();
        let cycles: Vec<Value> =
            self.boundary.cycles.iter().map(|c| json!({ "walk": c.walk, "length": num(c.length) })).collect();
        json!({
            "schema": "teichlab.limit/1",
            "graph": self.graph.to_json(),
            "lines": lines,
            "cycles": cycles,
            "half_planes": self.attachments.iter().filter(|a| a.1 == Attachment::HalfPlane).count(),
            "cylinders": self.attachments.iter().filter(|a| a.1 == Attachment::Cylinder).count(),
            "ends": self.ends.iter().map(End::to_json).collect::<Vec<_>>(),
            "components": comps,
        })
    }
}
