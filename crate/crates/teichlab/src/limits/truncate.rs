//! Compact pieces of a half-plane structure cut out by x-monotone staircases.

use super::{alternating_sum, EndKind, FaceRef, HalfPlaneStructure, LimitError};
use crate::flatsurf::{build_surface, EdgeGluing, EdgeRef, FlatPolygon, GluingKind, HalfTranslationSurface, Pt, SurfaceSpec};
use std::collections::HashMap;

/// A cut across one half-plane: height `heights[0]` left of `breaks[0]`,
/// `heights[k]` between `breaks[k-1]` and `breaks[k]`, and so on.
#[derive(Clone, Debug, PartialEq)]
pub struct Staircase {
    pub breaks: Vec<f64>,
    pub heights: Vec<f64>,
}

impl Staircase {
    pub fn flat(height: f64) -> Self {
        Staircase { breaks: Vec::new(), heights: vec![height] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationSpec {
    /// Distance kept along each ray, keyed by ray half-edge.
    pub ray_cut: HashMap<usize, f64>,
    /// One staircase per boundary line.
    pub lines: Vec<Staircase>,
    /// One height per boundary cycle.
    pub cycle_heights: Vec<f64>,
}

impl TruncationSpec {
    /// Every ray cut at `d` and every face cut at constant `height`.
    pub fn rectangles(hps: &HalfPlaneStructure, d: f64, height: f64) -> Self {
        TruncationSpec {
            ray_cut: hps.graph.rays().into_iter().map(|r| (r, d)).collect(),
            lines: vec![Staircase::flat(height); hps.boundary.lines.len()],
            cycle_heights: vec![height; hps.boundary.cycles.len()],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Truncation {
    pub spec: SurfaceSpec,
    pub surface: HalfTranslationSurface,
    /// Polygon index of each face, lines first.
    pub face_polygon: Vec<usize>,
    /// Residue of each end read off the horizontal cut edges.
    pub residues: Vec<f64>,
}

pub fn truncate(hps: &HalfPlaneStructure, t: &TruncationSpec) -> Result<Truncation, LimitError> {
    let g = &hps.graph;
    let b = &hps.boundary;
    if t.lines.len() != b.lines.len() || t.cycle_heights.len() != b.cycles.len() {
        return Err(LimitError::BadTruncation(format!(
            "{} staircases and {} cylinder heights for {} lines and {} cycles",
            t.lines.len(),
            t.cycle_heights.len(),
            b.lines.len(),
            b.cycles.len()
        )));
    }
    let cut = |r: usize| -> Result<f64, LimitError> {
        match t.ray_cut.get(&r) {
            Some(&d) if d > 0.0 && d.is_finite() => Ok(d),
            Some(&d) => Err(LimitError::CutOutside(format!("ray {r} cut at {d}"))),
            None => Err(LimitError::BadTruncation(format!("no cut distance for ray {r}"))),
        }
    };

    let mut polygons = Vec::new();
    // (polygon, edge) of each compact half-edge and of each ray piece.
    let mut slot = vec![None; g.half_edges.len()];
    let mut out_piece = HashMap::new();
    let mut in_piece = HashMap::new();
    let mut gluings = Vec::new();
    let mut cut_edges: Vec<(usize, usize)> = Vec::new();

    for (i, line) in b.lines.iter().enumerate() {
        let stairs = &t.lines[i];
        let (d_out, d_in) = (cut(line.outgoing)?, cut(line.incoming)?);
        let mut v = vec![Pt::new(-d_out, 0.0), Pt::new(0.0, 0.0)];
        let mut x = 0.0;
        for &h in line.walk.iter().rev() {
            x += g.lengths[h];
            slot[h] = Some((i, v.len() - 1));
            v.push(Pt::new(x, 0.0));
        }
        let right = x + d_in;
        in_piece.insert(line.incoming, (i, v.len() - 1));
        out_piece.insert(line.outgoing, (i, 0));
        let k = stairs.breaks.len();
        if stairs.heights.len() != k + 1 {
            return Err(LimitError::BadTruncation(format!("line {i}: {} heights for {k} breaks", stairs.heights.len())));
        }
        let mut prev = -d_out;
        for &br in &stairs.breaks {
            if !(br > prev && br < right) {
                return Err(LimitError::CutOutside(format!("line {i}: break {br} outside ({prev}, {right})")));
            }
            prev = br;
        }
        if let Some(&bad) = stairs.heights.iter().find(|&&hgt| !(hgt > 0.0 && hgt.is_finite())) {
            return Err(LimitError::CutOutside(format!("line {i}: height {bad}")));
        }
        v.push(Pt::new(right, 0.0));
        let first_cut = v.len();
        v.push(Pt::new(right, stairs.heights[k]));
        for j in (0..k).rev() {
            v.push(Pt::new(stairs.breaks[j], stairs.heights[j + 1]));
            v.push(Pt::new(stairs.breaks[j], stairs.heights[j]));
        }
        v.push(Pt::new(-d_out, stairs.heights[0]));
        cut_edges.push((first_cut, v.len() - 1));
        polygons.push(FlatPolygon::new(format!("line{i}"), v));
    }

    for (j, cyc) in b.cycles.iter().enumerate() {
        let hgt = t.cycle_heights[j];
        if !(hgt > 0.0 && hgt.is_finite()) {
            return Err(LimitError::CutOutside(format!("cycle {j}: height {hgt}")));
        }
        let p = polygons.len();
        let mut v = vec![Pt::new(0.0, 0.0)];
        let mut x = 0.0;
        for &h in cyc.walk.iter().rev() {
            x += g.lengths[h];
            slot[h] = Some((p, v.len() - 1));
            v.push(Pt::new(x, 0.0));
        }
        let n = v.len();
        v.push(Pt::new(x, hgt));
        v.push(Pt::new(0.0, hgt));
        gluings.push(glue((p, n - 1), (p, n + 1), GluingKind::Translation));
        cut_edges.push((n, n));
        polygons.push(FlatPolygon::new(format!("cycle{j}"), v));
    }

    for h in 0..g.half_edges.len() {
        if let Some(tw) = g.half_edges[h].twin {
            if h < tw {
                let (a, b) = (slot[h].expect("compact edge on a face"), slot[tw].expect("compact edge on a face"));
                gluings.push(glue(a, b, GluingKind::HalfTurn));
            }
        } else {
            gluings.push(glue(out_piece[&h], in_piece[&h], GluingKind::HalfTurn));
        }
    }

    let spec = SurfaceSpec { polygons, gluings, allow_boundary: true, marked: Vec::new() };
    let surface = build_surface(&spec)?;

    let cut_width: Vec<f64> = spec
        .polygons
        .iter()
        .zip(&cut_edges)
        .map(|(poly, &(lo, hi))| {
            (lo..=hi)
                .map(|e| {
                    let d = poly.edge_vec(e);
                    if d.y == 0.0 {
                        d.x.abs()
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect();
    let nl = b.lines.len();
    let residues = hps
        .ends
        .iter()
        .map(|end| {
            let widths: Vec<f64> = end
                .faces
                .iter()
                .map(|f| match *f {
                    FaceRef::Line(i) => cut_width[i],
                    FaceRef::Cycle(j) => cut_width[nl + j],
                })
                .collect();
            match end.kind {
                EndKind::Planar { m } if m % 2 == 1 => 0.0,
                _ => alternating_sum(&widths).abs(),
            }
        })
        .collect();

    Ok(Truncation { spec, surface, face_polygon: (0..cut_edges.len()).collect(), residues })
}

fn glue(a: (usize, usize), b: (usize, usize), kind: GluingKind) -> EdgeGluing {
    EdgeGluing { a: EdgeRef { poly: a.0, edge: a.1 }, b: EdgeRef { poly: b.0, edge: b.1 }, kind }
}
