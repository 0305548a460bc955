use proptest::prelude::*;
use std::collections::HashMap;
use teichlab::catalog;
use teichlab::flatsurf::{build_surface, critical_graph};
use teichlab::limits::{assemble_limit, metric_residue, truncate, EndKind, FacePolicy, HalfPlaneStructure, Staircase, TruncationSpec};
use teichlab::ribbon::MetricRibbonGraph;

fn graph(which: usize, a: f64) -> MetricRibbonGraph {
    match which {
        0..=5 => catalog::star(which + 3),
        6 => catalog::h_graph(a),
        7 => catalog::six_ray_graph(a),
        8 => catalog::loop_graph(a),
        _ => {
            let (_, spec) = catalog::closed_surfaces().swap_remove(which - 8);
            critical_graph(&build_surface(&spec).unwrap(), 50.0).unwrap().graph
        }
    }
}

// The square torus is left out: without zeros its critical graph is empty.
const GRAPHS: usize = 12;

/// Cut parameters in `[0, 1)`, turned into a valid truncation of `h`.
fn truncation(h: &HalfPlaneStructure, u: &[f64]) -> TruncationSpec {
    let mut it = u.iter().cycle();
    let mut next = || *it.next().unwrap();
    let ray_cut: HashMap<usize, f64> = h.graph.rays().into_iter().map(|r| (r, 0.1 + 3.0 * next())).collect();
    let lines = h
        .boundary
        .lines
        .iter()
        .map(|l| {
            let (lo, hi) = (-ray_cut[&l.outgoing], l.length + ray_cut[&l.incoming]);
            let k = (4.0 * next()) as usize;
            let mut breaks: Vec<f64> = (0..k).map(|_| lo + (hi - lo) * (0.01 + 0.98 * next())).collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let heights = (0..=breaks.len()).map(|_| 0.1 + 3.0 * next()).collect();
            Staircase { breaks, heights }
        })
        .collect();
    let cycle_heights = h.boundary.cycles.iter().map(|_| 0.1 + 3.0 * next()).collect();
    TruncationSpec { ray_cut, lines, cycle_heights }
}

proptest! {
    #[test]
    fn truncated_residues_do_not_depend_on_the_cut(
        which in 0..GRAPHS,
        a in 0.2..4.0f64,
        u in prop::collection::vec(0.0..1.0f64, 37),
        v in prop::collection::vec(0.0..1.0f64, 41),
    ) {
        let h = assemble_limit(&graph(which, a), &FacePolicy::Auto).unwrap();
        let (x, y) = (truncate(&h, &truncation(&h, &u)).unwrap(), truncate(&h, &truncation(&h, &v)).unwrap());
        for (end, (r, s)) in h.ends.iter().zip(x.residues.iter().zip(&y.residues)) {
            prop_assert!((r - s).abs() <= 1e-12 * (1.0 + r), "{} vs {}", r, s);
            prop_assert!((r - metric_residue(end)).abs() <= 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn ends_attachments_and_euler_counts_agree(which in 0..GRAPHS, a in 0.2..4.0f64) {
        let g = graph(which, a);
        let h = assemble_limit(&g, &FacePolicy::Auto).unwrap();
        let b = g.boundary();
        prop_assert_eq!(h.attachments.len(), b.lines.len() + b.cycles.len());
        for end in &h.ends {
            match end.kind {
                EndKind::Planar { m } => {
                    prop_assert_eq!(end.pole_order, m);
                    if m % 2 == 1 {
                        prop_assert_eq!(end.residue, 0.0);
                    }
                }
                EndKind::Cylindrical { circumference } => {
                    prop_assert_eq!(end.pole_order, 2);
                    prop_assert_eq!(end.residue, circumference);
                }
            }
            prop_assert!(end.pole_order >= 2);
        }
        // Vertices minus compact edges, counted per component from the graph itself.
        let mut chi: HashMap<usize, i64> = HashMap::new();
        let comps = g.components();
        let comp_of = |v: usize| comps.iter().position(|c| c.contains(&v)).unwrap();
        for c in 0..comps.len() {
            chi.insert(c, comps[c].len() as i64);
        }
        for e in &g.half_edges {
            if e.twin.is_some_and(|t| t > e.id) {
                *chi.get_mut(&comp_of(e.vertex)).unwrap() -= 1;
            }
        }
        let ends_total: usize = h.components.iter().map(|c| c.ends.len()).sum();
        prop_assert_eq!(ends_total, h.ends.len());
        for c in &h.components {
            let genus = c.genus.expect("limit components are surfaces");
            prop_assert_eq!(chi[&comp_of(c.vertices[0])], 2 - 2 * genus - c.ends.len() as i64);
        }
    }
}
