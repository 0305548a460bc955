//! Bundled example surfaces, graphs and tracks.

use crate::flatsurf::{build_surface, critical_graph, EdgeGluing, EdgeRef, FlatPolygon, GluingKind, Pt, SurfaceSpec};
use crate::limits::{assemble_limit, FacePolicy, LimitError};
use crate::ribbon::MetricRibbonGraph;
use crate::traintrack::{
    hb, AssemblyError, BranchEnd, CertRegion, RayAssemblySpec, Region, Side, Switch, TrainTrack, TransverseCertificate,
};

fn glue(a: (usize, usize), b: (usize, usize), kind: GluingKind) -> EdgeGluing {
    EdgeGluing { a: EdgeRef { poly: a.0, edge: a.1 }, b: EdgeRef { poly: b.0, edge: b.1 }, kind }
}

fn t(a: (usize, usize), b: (usize, usize)) -> EdgeGluing {
    glue(a, b, GluingKind::Translation)
}

fn pts(v: &[(f64, f64)]) -> Vec<Pt> {
    v.iter().map(|&(x, y)| Pt::new(x, y)).collect()
}

/// Unit square with opposite sides identified.
pub fn square_torus() -> SurfaceSpec {
    SurfaceSpec {
        polygons: vec![FlatPolygon::new("square", pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]))],
        gluings: vec![t((0, 0), (0, 2)), t((0, 1), (0, 3))],
        ..Default::default()
    }
}

/// Unit-area square torus rotated so that the horizontal direction has slope
/// `1/φ` against the lattice, cut along a horizontal slit `PQ` with midpoint
/// `M`; the two halves of each slit side are re-glued crosswise. Genus 2 with
/// a single 6π point, and dense horizontal leaves.
pub fn slit_torus() -> SurfaceSpec {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let th = (phi - 1.0).atan();
    let (s, c) = th.sin_cos();
    let v1 = Pt::new(c, s);
    let v2 = Pt::new(-s, c);
    let a = Pt::new(0.0, 0.0);
    let b = v1;
    let cc = v1.add(v2);
    let d = v2;
    let y0 = 0.7;
    // Intersections of y = y0 with the sides AD and BC.
    let l0 = d.scale(y0 / d.y);
    let r0 = b.add(v2.scale((y0 - b.y) / v2.y));
    let p = Pt::new(-0.1, y0);
    let m = Pt::new(0.15, y0);
    let q = Pt::new(0.4, y0);
    let lower = vec![a, b, r0, q, m, p, l0, r0.sub(v1)];
    let upper = vec![l0, p, m, q, r0, l0.add(v1), cc, d];
    SurfaceSpec {
        polygons: vec![FlatPolygon::new("lower", lower), FlatPolygon::new("upper", upper)],
        gluings: vec![
            t((0, 0), (1, 6)),
            t((1, 7), (1, 5)),
            t((0, 6), (1, 4)),
            t((0, 7), (0, 1)),
            t((0, 2), (1, 3)),
            t((0, 5), (1, 0)),
            t((1, 1), (0, 3)),
            t((1, 2), (0, 4)),
        ],
        ..Default::default()
    }
}

/// The rectangle `[0,3]×[0,1]` with its top thirds glued to the bottom thirds
/// in reversed order: genus 2, one 6π point, one horizontal cylinder.
pub fn strebel_one_cylinder() -> SurfaceSpec {
    let v = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (3.0, 1.0), (2.0, 1.0), (1.0, 1.0), (0.0, 1.0)]);
    SurfaceSpec {
        polygons: vec![FlatPolygon::new("strip", v)],
        gluings: vec![t((0, 4), (0, 0)), t((0, 5), (0, 1)), t((0, 6), (0, 2)), t((0, 7), (0, 3))],
        ..Default::default()
    }
}

/// An L-shaped polygon whose bottom unit segments are glued crosswise to
/// the two top segments: genus 2 with cylinders of circumference 2 and 1.
pub fn strebel_two_cylinders() -> SurfaceSpec {
    let v = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0), (0.0, 1.0)]);
    SurfaceSpec {
        polygons: vec![FlatPolygon::new("ell", v)],
        gluings: vec![t((0, 0), (0, 3)), t((0, 1), (0, 5)), t((0, 7), (0, 2)), t((0, 6), (0, 4))],
        ..Default::default()
    }
}

/// Chart of `zⁿ dz²` near the origin: `n+2` half-planes, truncated to
/// `[−L, L] × [0, L]`, each glued to the next along the real axis by a half-turn.
pub fn power_chart(n: usize, l: f64) -> SurfaceSpec {
    let k = n + 2;
    let polygons = (0..k)
        .map(|i| FlatPolygon::new(format!("h{i}"), pts(&[(-l, 0.0), (0.0, 0.0), (l, 0.0), (l, l), (-l, l)])))
        .collect();
    let gluings = (0..k).map(|i| glue((i, 1), ((i + 1) % k, 0), GluingKind::HalfTurn)).collect();
    SurfaceSpec { polygons, gluings, allow_boundary: true, marked: Vec::new() }
}

/// All bundled closed surfaces, by name.
pub fn closed_surfaces() -> Vec<(&'static str, SurfaceSpec)> {
    vec![
        ("square-torus", square_torus()),
        ("slit-torus", slit_torus()),
        ("strebel-one-cylinder", strebel_one_cylinder()),
        ("strebel-two-cylinders", strebel_two_cylinders()),
    ]
}

/// One vertex with `k` rays: the critical graph of `z^(k−2) dz²`.
pub fn star(k: usize) -> MetricRibbonGraph {
    let rot: Vec<usize> = (0..k).collect();
    MetricRibbonGraph::from_rotations(&[rot], &vec![None; k], &vec![f64::INFINITY; k]).expect("star")
}

/// Two trivalent vertices joined by an edge of length `a`, two rays at each.
pub fn h_graph(a: f64) -> MetricRibbonGraph {
    let inf = f64::INFINITY;
    MetricRibbonGraph::from_rotations(
        &[vec![0, 1, 2], vec![3, 4, 5]],
        &[Some(3), None, None, Some(0), None, None],
        &[a, inf, inf, a, inf, inf],
    )
    .expect("h graph")
}

/// A trivalent and a pentavalent vertex joined by an edge of length `a`:
/// one planar end with six boundary lines.
pub fn six_ray_graph(a: f64) -> MetricRibbonGraph {
    let inf = f64::INFINITY;
    MetricRibbonGraph::from_rotations(
        &[vec![0, 1, 2], vec![3, 4, 5, 6, 7]],
        &[Some(3), None, None, Some(0), None, None, None, None],
        &[a, inf, inf, a, inf, inf, inf, inf],
    )
    .expect("six-ray graph")
}

/// A single loop of length `c` at one vertex: two cylindrical ends.
pub fn loop_graph(c: f64) -> MetricRibbonGraph {
    MetricRibbonGraph::from_rotations(&[vec![0, 1]], &[Some(1), Some(0)], &[c, c]).expect("loop")
}

/// Branches `a`, `b`, `c` on a once-punctured torus: `a` splits into `b`
/// and `c`, which merge back into `a`. One complementary punctured bigon.
pub fn torus_track() -> TrainTrack {
    use BranchEnd::{End, Start};
    TrainTrack {
        names: vec!["a".into(), "b".into(), "c".into()],
        switches: vec![
            Switch { incoming: vec![hb(0, End)], outgoing: vec![hb(1, Start), hb(2, Start)], cusps: vec![0] },
            Switch { incoming: vec![hb(2, End), hb(1, End)], outgoing: vec![hb(0, Start)], cusps: vec![0] },
        ],
        regions: vec![Region::new(0, 2, 1)],
    }
}

fn petals(m: usize, petal: Region) -> TrainTrack {
    use BranchEnd::{End, Start};
    let mut names = vec!["b".to_string()];
    names.extend((1..=m + 1).map(|i| format!("a{i}")));
    let mut outgoing = Vec::new();
    let mut cusps = vec![1];
    for i in 1..=m + 1 {
        outgoing.extend([hb(i, Start), hb(i, End)]);
        cusps.push(i + 1);
        if i <= m {
            cusps.push(0);
        }
    }
    let mut regions = vec![Region::new(0, m as u32, 1)];
    regions.extend(std::iter::repeat(petal).take(m + 2));
    TrainTrack { names, switches: vec![Switch { incoming: vec![hb(0, Start), hb(0, End)], outgoing, cusps }], regions }
}

/// One switch carrying `m + 2` loops: `b` turns back on the incoming side,
/// `a1 … a(m+1)` on the outgoing side, so `2b = 2Σaᵢ`. The outer region is a
/// punctured m-gon; the puncture inside each loop is replaced by a handle.
pub fn petal_track(m: usize) -> TrainTrack {
    assert!(m >= 2, "a once-punctured monogon is not a valid region");
    petals(m, Region::new(1, 1, 0))
}

/// The same loops on the punctured sphere, before handles are added.
pub fn petal_sphere_track(m: usize) -> TrainTrack {
    petals(m, Region::new(0, 1, 1))
}

/// A closed curve crossing every loop of [`petal_track`] twice: inside each
/// loop it cuts off the cusp, and in the outer region it runs around the
/// puncture once past `b` and then from each `aᵢ` to the next.
pub fn petal_certificate(m: usize) -> TransverseCertificate {
    let region = |genus, punctures, cusps, arcs| CertRegion { genus, punctures, cusps, arcs };
    let mut regions = vec![region(0, 1, 0, 1), region(0, 0, 0, 2), region(0, 0, 0, m as u32 + 1)];
    regions.extend(std::iter::repeat(region(0, 0, 1, 1)).take(m));
    for _ in 0..m + 2 {
        regions.push(region(0, 0, 1, 1));
        regions.push(region(1, 0, 0, 1));
    }
    TransverseCertificate { crossings: (0..m + 2).flat_map(|b| [b, b]).collect(), regions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatsurf::build_surface;

    #[test]
    fn bundled_closed_surfaces_are_genus_two_or_tori() {
        for (name, spec) in closed_surfaces() {
            let s = build_surface(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
            let sum: i64 = s.zero_orders().iter().sum();
            assert_eq!(sum, 4 * s.genus() - 4, "{name}");
        }
    }

    #[test]
    fn strebel_surfaces_have_one_six_pi_point() {
        for spec in [strebel_one_cylinder(), strebel_two_cylinders()] {
            let s = build_surface(&spec).unwrap();
            assert_eq!(s.genus(), 2);
            assert_eq!(s.zero_orders(), vec![4]);
            assert_eq!(s.area(), 3.0);
        }
    }

    #[test]
    fn boundary_line_counts() {
        assert_eq!(star(6).boundary().lines.len(), 6);
        let h = h_graph(2.0).boundary();
        let lens: Vec<f64> = h.lines.iter().map(|l| l.length).collect();
        assert_eq!(lens.iter().filter(|&&l| l == 2.0).count(), 2);
        assert_eq!(six_ray_graph(1.0).boundary().lines.len(), 6);
        let lp = loop_graph(2.5).boundary();
        assert!(lp.lines.is_empty());
        assert_eq!(lp.cycles.len(), 2);
    }
}

/// The torus track around the degenerate end of the slit torus limit.
/// Walking the track's only region with the region on the right, the two
/// arcs between cusps are `c, a, b` traversed from their ends and `c, a, b`
/// traversed from their starts.
pub fn slit_torus_ray_datum(budget: f64) -> Result<RayAssemblySpec, AssemblyError> {
    let s = build_surface(&slit_torus())?;
    let cg = critical_graph(&s, budget).map_err(|e| LimitError::Trace(e.to_string()))?;
    let limit = assemble_limit(&cg.graph, &FacePolicy::Auto)?;
    Ok(RayAssemblySpec {
        residues: limit.ends.iter().map(|e| e.residue).collect(),
        limit,
        track: torus_track(),
        weights: vec![5.0, 2.0, 3.0],
        lengths: vec![1.0, 0.8, 0.6],
        t: 1.0,
        faces: vec![
            vec![(2, Side::Top), (0, Side::Top), (1, Side::Top)],
            vec![(2, Side::Bottom), (0, Side::Bottom), (1, Side::Bottom)],
        ],
    })
}
