//! Checking that a surface along a ray contains the half-plane structure's graph.

use super::{HalfPlaneStructure, LimitError};
use crate::flatsurf::{critical_graph, gamma_pieces, vertical_crossing, HalfTranslationSurface};
use crate::json::num;
use crate::ribbon::{find_isomorphism, IsoError};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct EmbedReport {
    pub t: f64,
    /// Image of each half-edge of the structure's graph in the critical graph.
    pub half_edge_map: Vec<usize>,
    /// Vertical distance from each face's boundary to the next crossing of the
    /// critical graph, lines first. `None` if no crossing was found.
    pub face_heights: Vec<Option<f64>>,
    /// Radius of the metric collar around the graph that embeds isometrically.
    pub exhaustion_radius: f64,
}

impl EmbedReport {
    pub fn to_json(&self) -> Value {
        json!({
            "t": num(self.t),
            "half_edge_map": self.half_edge_map,
            "face_heights": self.face_heights.iter().map(|h| h.map(num)).collect::<Vec<_>>(),
            "exhaustion_radius": num(self.exhaustion_radius),
        })
    }
}

/// Matches the structure's ribbon graph against the critical graph of
/// `surface` (lengths to 1e-9; rays match anything) and measures how far
/// each face extends vertically before meeting the graph again.
pub fn embed_check(
    hps: &HalfPlaneStructure,
    surface: &HalfTranslationSurface,
    t: f64,
    budget: f64,
) -> Result<EmbedReport, LimitError> {
    let cg = critical_graph(surface, budget).map_err(|e| LimitError::Trace(e.to_string()))?;
    let map = find_isomorphism(&hps.graph, &cg.graph, 1e-9).map_err(|e| match e {
        IsoError::LengthMismatch { edge, expected, found } => {
            LimitError::EmbedMismatch(format!("edge {edge}: length {expected} in the limit, {found} on the surface"))
        }
        other => LimitError::EmbedMismatch(other.to_string()),
    })?;
    let pieces = gamma_pieces(surface, &cg, true);
    let limit = 10.0 * surface.area() / surface.vertical_scale() + 10.0;
    let faces = hps
        .boundary
        .lines
        .iter()
        .map(|l| l.walk.first().map_or((l.incoming, false), |&h| (h, true)))
        .chain(hps.boundary.cycles.iter().map(|c| (c.walk[0], true)));
    let face_heights: Vec<Option<f64>> = faces
        .map(|(h, to_right)| {
            vertical_crossing(surface, &cg, &pieces, map[h], to_right, limit).map(|(_, _, len)| len * surface.vertical_scale())
        })
        .collect();
    let exhaustion_radius = face_heights.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b / 2.0));
    Ok(EmbedReport {
        t,
        half_edge_map: map,
        face_heights,
        exhaustion_radius: if exhaustion_radius.is_finite() { exhaustion_radius } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::flatsurf::{build_surface, stretch};
    use crate::limits::{assemble_limit, FacePolicy};
    use crate::ribbon::MetricRibbonGraph;

    fn strebel_limit() -> HalfPlaneStructure {
        // Critical graph of the one-cylinder surface: three unit loops at one vertex.
        let s = build_surface(&catalog::strebel_one_cylinder()).unwrap();
        let cg = critical_graph(&s, 100.0).unwrap();
        assemble_limit(&cg.graph, &FacePolicy::Auto).unwrap()
    }

    #[test]
    fn strebel_surface_contains_its_limit_graph() {
        let h = strebel_limit();
        let s = build_surface(&catalog::strebel_one_cylinder()).unwrap();
        let r = embed_check(&h, &stretch(&s, 4.0).unwrap(), 4.0, 100.0).unwrap();
        assert!((r.exhaustion_radius - 2.0).abs() < 1e-9, "{}", r.exhaustion_radius);
    }

    #[test]
    fn perturbed_length_is_a_mismatch() {
        let h = strebel_limit();
        let mut g: MetricRibbonGraph = h.graph.clone();
        let e = (0..g.lengths.len()).find(|&e| !g.is_ray(e)).unwrap();
        let tw = g.half_edges[e].twin.unwrap();
        g.lengths[e] += 1e-3;
        g.lengths[tw] += 1e-3;
        let bad = assemble_limit(&g, &FacePolicy::Auto).unwrap();
        let s = build_surface(&catalog::strebel_one_cylinder()).unwrap();
        let err = embed_check(&bad, &s, 1.0, 100.0).unwrap_err();
        assert!(matches!(err, LimitError::EmbedMismatch(_)), "{err}");
    }
}
