//! Surfaces along a ray: one `l_b × t·w_b` rectangle per branch, glued along
//! the horizontal boundary of a half-plane structure and stacked at switches.
//!
//! Each face of the structure (boundary line or cycle) lists the rectangle
//! sides lying on it, left to right in the face frame. A bottom side keeps
//! the rectangle's orientation, a top side is turned by π. The faces are
//! glued to each other along the graph by half-turns exactly as in a
//! truncation at height zero, so the whole surface scales with `t`.

use super::{check_switch_conditions_f64, validate, BranchEnd, Census, Region, Switch, TrackError, TrainTrack};
use crate::flatsurf::{
    build_surface, cylinder_decomposition, critical_graph, CylinderError, EdgeGluing, EdgeRef, FlatPolygon, GluingKind,
    HalfTranslationSurface, Pt, SurfaceError, SurfaceSpec,
};
use crate::limits::{alternating_sum, assemble_limit, EndKind, FacePolicy, FaceRef, HalfPlaneStructure, LimitError};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Top,
}

#[derive(Clone, Debug)]
pub struct RayAssemblySpec {
    pub limit: HalfPlaneStructure,
    pub track: TrainTrack,
    pub weights: Vec<f64>,
    /// Horizontal length of each branch rectangle.
    pub lengths: Vec<f64>,
    pub t: f64,
    /// Rectangle sides on each face, lines first, left to right.
    pub faces: Vec<Vec<(usize, Side)>>,
    /// Metric residue of the crown end matched with each end of the limit.
    pub residues: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("{0}")]
    BadSpec(String),
    #[error("end {end}: crown residue {crown}, limit residue {limit}")]
    ResidueMismatch { end: usize, crown: f64, limit: f64 },
    #[error("end {end}: no positive overhangs fit the rectangle lengths")]
    Overhang { end: usize },
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error("assembled polygons do not form a closed surface: {0}")]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Cylinder(#[from] CylinderError),
}

#[derive(Clone, Debug)]
pub struct RayAssembly {
    pub surface: HalfTranslationSurface,
    /// Overhang of each line past its incoming ray.
    pub overhangs: Vec<f64>,
    /// Branches whose two sides lie on faces of the same end.
    pub same_end_branches: Vec<usize>,
}

/// Length, width and half-width of the rectangle of a branch.
pub fn branch_rectangle(l: f64, w: f64, t: f64) -> (f64, f64, f64) {
    (l, t * w, t * w / 2.0)
}

const SAME: f64 = 1e-12;
const MATCH: f64 = 1e-9;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Sorted points with near-duplicates merged.
fn merged(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().map_or(true, |&y| !close(x, y, SAME)) {
            out.push(x);
        }
    }
    out
}

fn find(v: &[f64], x: f64) -> Option<usize> {
    let i = v.partition_point(|&y| y < x);
    [i.wrapping_sub(1), i].into_iter().filter(|&j| j < v.len()).find(|&j| close(v[j], x, MATCH))
}

/// A run of consecutive segments of a face or switch owned by one rectangle side.
#[derive(Clone, Copy, Debug)]
struct Run {
    rect: usize,
    first: usize,
    len: usize,
    /// Segment `k` of the run is edge `base + k` (or `base + len − 1 − k`).
    base: usize,
    reversed: bool,
}

impl Run {
    fn edge(&self, j: usize) -> Option<EdgeRef> {
        (self.first..self.first + self.len).contains(&j).then(|| {
            let k = j - self.first;
            EdgeRef { poly: self.rect, edge: self.base + if self.reversed { self.len - 1 - k } else { k } }
        })
    }
}

pub fn assemble_ray_surface(spec: &RayAssemblySpec) -> Result<RayAssembly, AssemblyError> {
    let t = spec.t;
    if !(t > 0.0 && t.is_finite()) {
        return Err(AssemblyError::NonPositiveT(t));
    }
    let hps = &spec.limit;
    let g = &hps.graph;
    let (lines, cycles) = (&hps.boundary.lines, &hps.boundary.cycles);
    let (nl, nf) = (lines.len(), lines.len() + cycles.len());
    let nb = spec.track.branches();
    let bad = |s: String| Err(AssemblyError::BadSpec(s));
    if spec.weights.len() != nb || spec.lengths.len() != nb {
        return bad(format!("{nb} branches, {} weights, {} lengths", spec.weights.len(), spec.lengths.len()));
    }
    if let Some(b) = (0..nb).find(|&b| !(spec.weights[b] > 0.0 && spec.lengths[b] > 0.0)) {
        return bad(format!("branch {b} needs positive weight and length"));
    }
    if !check_switch_conditions_f64(&spec.track, &spec.weights, 1e-12)?.1 {
        return bad("weights do not satisfy the switch conditions".into());
    }
    if spec.faces.len() != nf {
        return bad(format!("{} face lists for {nf} faces", spec.faces.len()));
    }
    let mut seen = vec![[false; 2]; nb];
    for &(b, s) in spec.faces.iter().flatten() {
        if b >= nb || std::mem::replace(&mut seen[b][s as usize], true) {
            return bad(format!("branch {b} side {s:?} listed twice or out of range"));
        }
    }
    if let Some(b) = seen.iter().position(|s| !s[0] || !s[1]) {
        return bad(format!("branch {b} is missing a side"));
    }
    if spec.residues.len() != hps.ends.len() {
        return bad(format!("{} crown residues for {} ends", spec.residues.len(), hps.ends.len()));
    }

    let width: Vec<f64> = spec.faces.iter().map(|f| f.iter().map(|&(b, _)| spec.lengths[b]).sum()).collect();
    let face_index = |f: FaceRef| match f {
        FaceRef::Line(i) => i,
        FaceRef::Cycle(j) => nl + j,
    };
    // Overhang past the incoming ray of each line.
    let mut q_in = vec![0.0; nl];
    let mut end_of_face = vec![0; nf];
    for (e, end) in hps.ends.iter().enumerate() {
        let crown = spec.residues[e];
        if !close(crown, end.residue, MATCH) {
            return Err(AssemblyError::ResidueMismatch { end: e, crown, limit: end.residue });
        }
        for &f in &end.faces {
            end_of_face[face_index(f)] = e;
        }
        match end.kind {
            EndKind::Cylindrical { circumference } => {
                for &f in &end.faces {
                    let w = width[face_index(f)];
                    if !close(w, circumference, MATCH) {
                        return Err(AssemblyError::ResidueMismatch { end: e, crown: w, limit: circumference });
                    }
                }
            }
            EndKind::Planar { m } => {
                // Walking the end, d_k = q_k + q_{k+1}.
                let d: Vec<f64> = end.faces.iter().zip(&end.lengths).map(|(&f, &l)| width[face_index(f)] - l).collect();
                let alt = alternating_sum(&d);
                let mut q = vec![0.0; m];
                if m % 2 == 1 {
                    q[0] = alt / 2.0;
                } else {
                    let h: Vec<f64> = end.faces.iter().map(|&f| width[face_index(f)]).collect();
                    if !close(alt, 0.0, MATCH) {
                        return Err(AssemblyError::ResidueMismatch { end: e, crown: alternating_sum(&h).abs(), limit: end.residue });
                    }
                    // q_k = ±q_0 + c_k; take the middle of the interval keeping all positive.
                    let (mut lo, mut hi, mut c) = (0.0f64, f64::INFINITY, 0.0);
                    for k in 0..m {
                        if k % 2 == 0 {
                            lo = lo.max(-c);
                        } else {
                            hi = hi.min(c);
                        }
                        c = d[k] - c;
                    }
                    q[0] = if hi.is_finite() { (lo + hi) / 2.0 } else { lo + 1.0 };
                }
                for k in 1..m {
                    q[k] = d[k - 1] - q[k - 1];
                }
                if q.iter().any(|&x| !(x > 0.0)) {
                    return Err(AssemblyError::Overhang { end: e });
                }
                for (k, &f) in end.faces.iter().enumerate() {
                    q_in[face_index(f)] = q[k];
                }
            }
        }
    }
    let by_incoming: std::collections::HashMap<usize, usize> = lines.iter().enumerate().map(|(i, l)| (l.incoming, i)).collect();
    let q_out: Vec<f64> = lines.iter().map(|l| q_in[by_incoming[&l.outgoing]]).collect();

    // Intervals of the graph on each face and their half-turn partners.
    let mut left = vec![0.0; nf];
    let mut slot = vec![(0, 0.0); g.half_edges.len()];
    let mut ray_in = std::collections::HashMap::new();
    let mut ray_out = std::collections::HashMap::new();
    for (f, walk) in lines.iter().map(|l| &l.walk).chain(cycles.iter().map(|c| &c.walk)).enumerate() {
        let mut x = 0.0;
        for &h in walk.iter().rev() {
            slot[h] = (f, x);
            x += g.lengths[h];
        }
        if f < nl {
            left[f] = -q_out[f];
            ray_in.insert(lines[f].incoming, (f, x, left[f] + width[f]));
            ray_out.insert(lines[f].outgoing, (f, left[f], 0.0));
        }
    }
    // (face, u0, u1, face', v0, v1), both directions.
    let mut pairs: Vec<(usize, f64, f64, usize, f64, f64)> = Vec::new();
    for h in 0..g.half_edges.len() {
        let (a, b) = match g.half_edges[h].twin {
            Some(tw) => {
                let ((f, x), (f2, x2)) = (slot[h], slot[tw]);
                ((f, x, x + g.lengths[h]), (f2, x2, x2 + g.lengths[h]))
            }
            None => (ray_in[&h], ray_out[&h]),
        };
        pairs.push((a.0, a.1, a.2, b.0, b.1, b.2));
    }
    let flipped: Vec<_> = pairs.iter().map(|&(f, u0, u1, f2, v0, v1)| (f2, v0, v1, f, u0, u1)).collect();
    pairs.extend(flipped);

    // Breakpoints of each face.
    let mut placed = vec![[(0usize, 0.0f64); 2]; nb];
    let mut raw: Vec<Vec<f64>> = vec![Vec::new(); nf];
    for f in 0..nf {
        let mut x = left[f];
        raw[f].push(x);
        for &(b, s) in &spec.faces[f] {
            placed[b][s as usize] = (f, x);
            x += spec.lengths[b];
            raw[f].push(x);
        }
    }
    for p in &pairs {
        raw[p.0].extend([p.1, p.2]);
    }
    let own = raw.clone();
    for &(f, u0, u1, f2, v0, v1) in &pairs {
        let c = u0 + v1;
        raw[f2].extend(own[f].iter().filter(|&&x| x > u0 && x < u1).map(|&x| c - x).filter(|&y| y > v0 && y < v1));
    }
    let pts: Vec<Vec<f64>> = raw.into_iter().map(merged).collect();

    // Breakpoints of each switch, in switch height from the bottom of the stack.
    struct Piece {
        branch: usize,
        end: BranchEnd,
        offset: f64,
        aligned: bool,
    }
    let mut stacks: Vec<[Vec<Piece>; 2]> = Vec::new();
    let mut spts: Vec<Vec<f64>> = Vec::new();
    for sw in &spec.track.switches {
        let mut breaks = vec![0.0];
        let mut sides: [Vec<Piece>; 2] = [Vec::new(), Vec::new()];
        for (side, (list, inc)) in [(&sw.incoming, true), (&sw.outgoing, false)].into_iter().enumerate() {
            let mut y = 0.0;
            for h in list {
                let aligned = (h.end == BranchEnd::End) == inc;
                sides[side].push(Piece { branch: h.branch, end: h.end, offset: y, aligned });
                y += t * spec.weights[h.branch];
                breaks.push(y);
            }
        }
        spts.push(merged(breaks));
        stacks.push(sides);
    }

    // Rectangles: bottom, right (End), top, left (Start).
    let height: Vec<f64> = spec.weights.iter().map(|w| t * w).collect();
    let mut polygons = Vec::with_capacity(nb);
    let mut face_runs: Vec<Vec<Run>> = vec![Vec::new(); nf];
    let mut switch_runs: Vec<[Vec<Run>; 2]> = vec![[Vec::new(), Vec::new()]; stacks.len()];
    let mut vert_pts: Vec<[(usize, usize, usize, bool); 2]> = vec![[(0, 0, 0, false); 2]; nb];
    for (s, sides) in stacks.iter().enumerate() {
        for pieces in sides {
            for p in pieces {
                let (Some(i0), Some(i1)) =
                    (find(&spts[s], p.offset), find(&spts[s], p.offset + height[p.branch]))
                else {
                    return bad(format!("switch {s}: stack breakpoints do not line up"));
                };
                vert_pts[p.branch][(p.end == BranchEnd::End) as usize] = (s, i0, i1, p.aligned);
            }
        }
    }
    for b in 0..nb {
        let (l, hgt) = (spec.lengths[b], height[b]);
        let mut v = Vec::new();
        let mut horiz = [(0usize, 0usize, 0usize); 2];
        for (k, side) in [Side::Bottom, Side::Top].into_iter().enumerate() {
            let (f, a) = placed[b][side as usize];
            let (Some(i0), Some(i1)) = (find(&pts[f], a), find(&pts[f], a + l)) else {
                return bad(format!("face {f}: breakpoints do not line up"));
            };
            horiz[k] = (f, i0, i1);
        }
        // Bottom.
        let (f, i0, i1) = horiz[0];
        let base_bottom = v.len();
        for j in i0..i1 {
            let x = if j == i0 { 0.0 } else { pts[f][j] - placed[b][0].1 };
            v.push(Pt::new(x, 0.0));
        }
        face_runs[f].push(Run { rect: b, first: i0, len: i1 - i0, base: base_bottom, reversed: false });
        // Right side, at the End switch.
        let base_right = v.len();
        let (s, j0, j1, aligned) = vert_pts[b][1];
        let ys: Vec<f64> = (j0..=j1).map(|j| own_height(&spts[s], j, j0, j1, hgt, aligned)).collect();
        let mut asc = ys.clone();
        if !aligned {
            asc.reverse();
        }
        for &y in &asc[..asc.len() - 1] {
            v.push(Pt::new(l, y));
        }
        switch_runs[s][0].push(Run { rect: b, first: j0, len: j1 - j0, base: base_right, reversed: !aligned });
        // Top, turned by π: face order runs right to left along the rectangle.
        let (f, i0, i1) = horiz[1];
        let base_top = v.len();
        for j in i0..i1 {
            let x = if j == i0 { l } else { placed[b][1].1 + l - pts[f][j] };
            v.push(Pt::new(x, hgt));
        }
        face_runs[f].push(Run { rect: b, first: i0, len: i1 - i0, base: base_top, reversed: false });
        // Left side, at the Start switch, walked downwards.
        let base_left = v.len();
        let (s, j0, j1, aligned) = vert_pts[b][0];
        let ys: Vec<f64> = (j0..=j1).map(|j| own_height(&spts[s], j, j0, j1, hgt, aligned)).collect();
        let mut desc = ys;
        if aligned {
            desc.reverse();
        }
        for &y in &desc[..desc.len() - 1] {
            v.push(Pt::new(0.0, y));
        }
        switch_runs[s][1].push(Run { rect: b, first: j0, len: j1 - j0, base: base_left, reversed: aligned });
        polygons.push(FlatPolygon::new(spec.track.names[b].clone(), v));
    }
    // Switch runs were filed by rectangle side; regroup them by switch side.
    let mut by_side: Vec<[Vec<Run>; 2]> = vec![[Vec::new(), Vec::new()]; stacks.len()];
    for (s, sides) in stacks.iter().enumerate() {
        for (side, pieces) in sides.iter().enumerate() {
            for p in pieces {
                let k = (p.end == BranchEnd::Start) as usize;
                let run = *switch_runs[s][k].iter().find(|r| r.rect == p.branch).expect("run filed above");
                by_side[s][side].push(run);
            }
        }
    }

    let mut gluings = Vec::new();
    let mut done = std::collections::HashSet::new();
    let mut glue = |a: EdgeRef, b: EdgeRef, polys: &[FlatPolygon]| -> Result<(), AssemblyError> {
        if done.contains(&a) || done.contains(&b) {
            return Ok(());
        }
        let (va, vb) = (polys[a.poly].edge_vec(a.edge), polys[b.poly].edge_vec(b.edge));
        let tol = MATCH * (1.0 + va.norm());
        let kind = if va.add(vb).norm() <= tol {
            GluingKind::Translation
        } else if va.sub(vb).norm() <= tol {
            GluingKind::HalfTurn
        } else {
            return Err(AssemblyError::BadSpec(format!("edges {a:?} and {b:?} are not parallel")));
        };
        done.insert(a);
        done.insert(b);
        gluings.push(EdgeGluing { a, b, kind });
        Ok(())
    };
    let run_edge = |runs: &[Run], j: usize| runs.iter().find_map(|r| r.edge(j));
    for f in 0..nf {
        for j in 0..pts[f].len() - 1 {
            let (x0, x1) = (pts[f][j], pts[f][j + 1]);
            let Some(a) = run_edge(&face_runs[f], j) else {
                return bad(format!("face {f}: segment [{x0}, {x1}] is not covered by a rectangle"));
            };
            let mid = (x0 + x1) / 2.0;
            let Some(&(_, u0, _, f2, _, v1)) = pairs.iter().find(|p| p.0 == f && p.1 < mid && mid < p.2) else {
                return bad(format!("face {f}: segment [{x0}, {x1}] is not on the graph"));
            };
            let Some(j2) = find(&pts[f2], u0 + v1 - x1) else {
                return bad(format!("face {f2}: missing breakpoint"));
            };
            let Some(b) = run_edge(&face_runs[f2], j2) else {
                return bad(format!("face {f2}: segment {j2} is not covered by a rectangle"));
            };
            glue(a, b, &polygons)?;
        }
    }
    for (s, sides) in by_side.iter().enumerate() {
        for j in 0..spts[s].len() - 1 {
            match (run_edge(&sides[0], j), run_edge(&sides[1], j)) {
                (Some(a), Some(b)) => glue(a, b, &polygons)?,
                _ => return bad(format!("switch {s}: the two sides have different heights")),
            }
        }
    }

    let spec_out = SurfaceSpec { polygons, gluings, allow_boundary: false, marked: Vec::new() };
    let surface = build_surface(&spec_out)?;
    let same_end_branches =
        (0..nb).filter(|&b| end_of_face[placed[b][0].0] == end_of_face[placed[b][1].0]).collect();
    Ok(RayAssembly { surface, overhangs: q_in, same_end_branches })
}

/// Height on the rectangle's own side of the `j`-th switch breakpoint, with
/// the two ends snapped exactly.
fn own_height(pts: &[f64], j: usize, j0: usize, j1: usize, hgt: f64, aligned: bool) -> f64 {
    let from_bottom = if j == j0 {
        0.0
    } else if j == j1 {
        hgt
    } else {
        pts[j] - pts[j0]
    };
    if aligned {
        from_bottom
    } else {
        hgt - from_bottom
    }
}

/// The datum of a surface whose horizontal foliation is made of closed
/// leaves: the critical graph as limit, one looping branch per cylinder.
pub fn strebel_datum(surface: &HalfTranslationSurface, budget: f64) -> Result<RayAssemblySpec, AssemblyError> {
    let cg = critical_graph(surface, budget).map_err(|e| LimitError::Trace(e.to_string()))?;
    let limit = assemble_limit(&cg.graph, &FacePolicy::Auto)?;
    let cylinders = cylinder_decomposition(surface, budget)?;
    let nl = limit.boundary.lines.len();
    let cycle_of = |h: usize| {
        limit.boundary.cycles.iter().position(|c| c.walk.contains(&h)).map(|j| nl + j).expect("cylinder boundary is a cycle")
    };
    let mut faces = vec![Vec::new(); nl + limit.boundary.cycles.len()];
    let mut switches = Vec::new();
    for (b, c) in cylinders.iter().enumerate() {
        faces[cycle_of(c.boundary[0][0])].push((b, Side::Bottom));
        faces[cycle_of(c.boundary[1][0])].push((b, Side::Top));
        switches.push(Switch {
            incoming: vec![super::hb(b, BranchEnd::End)],
            outgoing: vec![super::hb(b, BranchEnd::Start)],
            cusps: Vec::new(),
        });
    }
    let regions = limit
        .components
        .iter()
        .map(|comp| {
            let chi = comp.euler_characteristic;
            let boundaries = comp.ends.len() as i64;
            Region { genus: ((2 - chi - boundaries) / 2) as u32, corners: 0, punctures: 0, boundaries: boundaries as u32 }
        })
        .collect();
    let track = TrainTrack { names: (0..cylinders.len()).map(|b| format!("c{b}")).collect(), switches, regions };
    let _: Census = validate(&track)?;
    Ok(RayAssemblySpec {
        residues: limit.ends.iter().map(|e| e.residue).collect(),
        weights: cylinders.iter().map(|c| c.height / surface.vertical_scale()).collect(),
        lengths: cylinders.iter().map(|c| c.circumference).collect(),
        t: 1.0,
        faces,
        track,
        limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::flatsurf::stretch;
    use crate::limits::embed_check;

    fn datum(spec: crate::flatsurf::SurfaceSpec) -> RayAssemblySpec {
        strebel_datum(&build_surface(&spec).unwrap(), 20.0).unwrap()
    }

    fn at(d: &RayAssemblySpec, t: f64) -> HalfTranslationSurface {
        assemble_ray_surface(&RayAssemblySpec { t, ..d.clone() }).unwrap().surface
    }

    #[test]
    fn rectangle_dimensions() {
        assert_eq!(branch_rectangle(3.0, 0.5, 4.0), (3.0, 2.0, 1.0));
    }

    #[test]
    fn strebel_datum_reassembles_its_cylinders() {
        for spec in [catalog::strebel_one_cylinder(), catalog::strebel_two_cylinders()] {
            let s = build_surface(&spec).unwrap();
            let d = strebel_datum(&s, 20.0).unwrap();
            let before = cylinder_decomposition(&s, 20.0).unwrap();
            for t in [2.0, 4.0, 8.0] {
                let sig = at(&d, t);
                assert_eq!(sig.genus(), s.genus());
                assert_eq!(sig.zero_orders(), s.zero_orders());
                assert!((sig.area() - t * s.area()).abs() < 1e-12 * t * s.area());
                let rep = embed_check(&d.limit, &sig, t, 50.0).unwrap();
                assert!(rep.exhaustion_radius > 0.0);
                let mut moduli: Vec<f64> = cylinder_decomposition(&sig, 50.0).unwrap().iter().map(|c| c.modulus).collect();
                let mut expect: Vec<f64> = before.iter().map(|c| t * c.modulus).collect();
                moduli.sort_by(f64::total_cmp);
                expect.sort_by(f64::total_cmp);
                for (a, b) in moduli.iter().zip(&expect) {
                    assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn doubling_t_doubles_heights() {
        let d = datum(catalog::strebel_two_cylinders());
        let (a, b) = (at(&d, 3.0), at(&d, 6.0));
        let s = stretch(&a, 2.0).unwrap();
        for ((p, q), r) in a.polygons().iter().zip(b.polygons()).zip(s.polygons()) {
            for ((u, v), w) in p.vertices.iter().zip(&q.vertices).zip(&r.vertices) {
                assert_eq!(u.x, v.x);
                assert!((2.0 * u.y - v.y).abs() <= 1e-12 * v.y.abs().max(1.0));
                assert!((w.y - v.y).abs() <= 1e-12 * v.y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let d = datum(catalog::strebel_one_cylinder());
        let e = assemble_ray_surface(&RayAssemblySpec { t: 0.0, ..d.clone() }).unwrap_err();
        assert_eq!(e, AssemblyError::NonPositiveT(0.0));
        let mut r = d.clone();
        r.residues[0] += 0.5;
        assert!(matches!(assemble_ray_surface(&r).unwrap_err(), AssemblyError::ResidueMismatch { end: 0, .. }));
        let mut r = d.clone();
        r.lengths[0] += 0.5;
        assert!(matches!(assemble_ray_surface(&r).unwrap_err(), AssemblyError::ResidueMismatch { .. }));
    }

    #[test]
    fn torus_track_closes_up_the_slit_torus_end() {
        let d = catalog::slit_torus_ray_datum(20.0).unwrap();
        for t in [0.5, 1.0, 4.0] {
            let a = assemble_ray_surface(&RayAssemblySpec { t, ..d.clone() }).unwrap();
            assert_eq!(a.surface.genus(), 2);
            assert_eq!(a.surface.zero_orders(), vec![4]);
            assert_eq!(a.same_end_branches, vec![0, 1, 2]);
            assert!(a.overhangs.iter().all(|&q| q > 0.0));
            let area: f64 = (0..3).map(|b| d.lengths[b] * t * d.weights[b]).sum();
            assert!((a.surface.area() - area).abs() < 1e-12 * area);
            assert!(embed_check(&d.limit, &a.surface, t, 50.0).unwrap().exhaustion_radius > 0.0);
        }
    }

    #[test]
    fn unequal_sides_of_an_even_end_are_rejected() {
        let mut d = catalog::slit_torus_ray_datum(20.0).unwrap();
        d.faces[0] = vec![(2, Side::Top), (0, Side::Top), (0, Side::Bottom)];
        d.faces[1] = vec![(2, Side::Bottom), (1, Side::Top), (1, Side::Bottom)];
        assert!(matches!(assemble_ray_surface(&d), Err(AssemblyError::ResidueMismatch { end: 0, .. })));
    }
}
