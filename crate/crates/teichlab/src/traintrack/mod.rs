//! Train tracks with exact rational weights.
//!
//! A switch lists its incoming and outgoing half-branches, each side stacked
//! bottom to top in the switch's own frame (incoming on the left). Cusps sit
//! between neighbours on the same side and may be labelled with the
//! complementary region they point into.

mod assemble;
mod recurrence;
mod split;

pub use assemble::{assemble_ray_surface, branch_rectangle, strebel_datum, AssemblyError, RayAssembly, RayAssemblySpec, Side};
pub use recurrence::{is_birecurrent, CertRegion, CertificateError, Recurrence, TransverseCertificate};
pub use split::{large_branches, split, SplitError, SplitKind, SplitRecord};

use crate::json::{check_schema, parse_rational, rational};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchEnd {
    Start,
    End,
}

impl BranchEnd {
    pub fn other(self) -> Self {
        match self {
            BranchEnd::Start => BranchEnd::End,
            BranchEnd::End => BranchEnd::Start,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BranchEnd::Start => "start",
            BranchEnd::End => "end",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfBranch {
    pub branch: usize,
    pub end: BranchEnd,
}

pub fn hb(branch: usize, end: BranchEnd) -> HalfBranch {
    HalfBranch { branch, end }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Switch {
    pub incoming: Vec<HalfBranch>,
    pub outgoing: Vec<HalfBranch>,
    /// Region of each cusp: incoming gaps bottom to top, then outgoing gaps.
    /// Empty when unlabelled.
    pub cusps: Vec<usize>,
}

impl Switch {
    pub fn corners(&self) -> usize {
        self.incoming.len().saturating_sub(1) + self.outgoing.len().saturating_sub(1)
    }

    /// Half-branches in counterclockwise order: outgoing bottom to top, then
    /// incoming top to bottom. The flag is `true` for incoming.
    pub fn rotation(&self) -> Vec<(HalfBranch, bool)> {
        self.outgoing.iter().map(|&h| (h, false)).chain(self.incoming.iter().rev().map(|&h| (h, true))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub genus: u32,
    pub corners: u32,
    pub punctures: u32,
    pub boundaries: u32,
}

impl Region {
    pub fn new(genus: u32, corners: u32, punctures: u32) -> Self {
        Region { genus, corners, punctures, boundaries: 1 }
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundaries as i64 - self.punctures as i64
    }

    /// Name of the forbidden shape this region has, if any.
    pub fn forbidden(&self) -> Option<&'static str> {
        if self.genus > 0 {
            return None;
        }
        match (self.boundaries, self.punctures, self.corners) {
            (1, 0, 0) => Some("disk"),
            (1, 0, 1) => Some("monogon"),
            (1, 0, 2) => Some("bigon"),
            (1, 1, 1) => Some("once-punctured monogon"),
            (1, 1, 0) | (2, 0, 0) => Some("annulus"),
            _ => None,
        }
    }

    fn to_json(self) -> Value {
        let mut v = json!({ "genus": self.genus, "corners": self.corners, "punctures": self.punctures });
        if self.boundaries != 1 {
            v["boundaries"] = json!(self.boundaries);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainTrack {
    pub names: Vec<String>,
    pub switches: Vec<Switch>,
    pub regions: Vec<Region>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrackError {
    #[error("switch {0} has an empty side")]
    EmptySide(usize),
    #[error("branch {branch} {end:?} end appears {count} times")]
    BadEnd { branch: usize, end: BranchEnd, count: usize },
    #[error("switch {switch}: {found} cusp labels for {expected} cusps")]
    CuspLabels { switch: usize, expected: usize, found: usize },
    #[error("region {region} has {stated} corners but {labelled} labelled cusps")]
    CuspCount { region: usize, stated: u32, labelled: usize },
    #[error("regions have {stated} corners, switches have {expected}")]
    CornerTotal { stated: usize, expected: usize },
    #[error("region census does not fit a surface (twice the genus would be {0})")]
    Euler(i64),
    #[error("no region census")]
    NoCensus,
    #[error("region {region} is a {kind}")]
    Forbidden { region: usize, kind: &'static str },
    #[error("{0} weights for {1} branches")]
    WeightCount(usize, usize),
    #[error("{0}")]
    Schema(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub regions: Vec<Region>,
    pub surface_genus: i64,
    pub punctures: u32,
    pub corners: usize,
}

impl Census {
    pub fn to_json(&self) -> Value {
        json!({
            "surface_genus": self.surface_genus,
            "punctures": self.punctures,
            "corners": self.corners,
            "regions": self.regions.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

impl TrainTrack {
    pub fn branches(&self) -> usize {
        self.names.len()
    }

    /// Switch and side holding a half-branch (`true` for incoming).
    pub fn locate(&self, h: HalfBranch) -> Option<(usize, bool, usize)> {
        self.switches.iter().enumerate().find_map(|(s, sw)| {
            sw.incoming
                .iter()
                .position(|&x| x == h)
                .map(|i| (s, true, i))
                .or_else(|| sw.outgoing.iter().position(|&x| x == h).map(|i| (s, false, i)))
        })
    }

    fn check_structure(&self) -> Result<(), TrackError> {
        let mut count = vec![[0usize; 2]; self.branches()];
        for (s, sw) in self.switches.iter().enumerate() {
            if sw.incoming.is_empty() || sw.outgoing.is_empty() {
                return Err(TrackError::EmptySide(s));
            }
            for h in sw.incoming.iter().chain(&sw.outgoing) {
                if h.branch >= count.len() {
                    return Err(TrackError::BadEnd { branch: h.branch, end: h.end, count: 0 });
                }
                count[h.branch][h.end as usize] += 1;
            }
            if !sw.cusps.is_empty() && sw.cusps.len() != sw.corners() {
                return Err(TrackError::CuspLabels { switch: s, expected: sw.corners(), found: sw.cusps.len() });
            }
        }
        for (b, c) in count.iter().enumerate() {
            for end in [BranchEnd::Start, BranchEnd::End] {
                if c[end as usize] != 1 {
                    return Err(TrackError::BadEnd { branch: b, end, count: c[end as usize] });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let refs = |v: &[HalfBranch]| -> Vec<Value> { v.iter().map(|h| json!([self.names[h.branch], h.end.name()])).collect() };
        let switches: Vec<Value> = self
            .switches
            .iter()
            .map(|s| {
                let mut v = json!({ "incoming": refs(&s.incoming), "outgoing": refs(&s.outgoing) });
                if !s.cusps.is_empty() {
                    v["cusps"] = json!(s.cusps);
                }
                v
            })
            .collect();
        json!({
            "schema": "teichlab.track/1",
            "branches": self.names,
            "switches": switches,
            "regions": self.regions.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, TrackError> {
        check_schema(v, "teichlab.track").map_err(TrackError::Schema)?;
        let err = |m: &str| TrackError::Schema(m.to_string());
        let names: Vec<String> = v["branches"]
            .as_array()
            .ok_or_else(|| err("field `branches`: expected an array of names"))?
            .iter()
            .map(|n| n.as_str().map(str::to_string).ok_or_else(|| err("field `branches`: names must be strings")))
            .collect::<Result<_, _>>()?;
        let find = |x: &Value| -> Result<HalfBranch, TrackError> {
            let name = x[0].as_str().ok_or_else(|| err("half-branch: expected [name, \"start\"|\"end\"]"))?;
            let branch = names.iter().position(|n| n == name).ok_or_else(|| TrackError::Schema(format!("unknown branch `{name}`")))?;
            let end = match x[1].as_str() {
                Some("start") => BranchEnd::Start,
                Some("end") => BranchEnd::End,
                _ => return Err(err("half-branch: end must be \"start\" or \"end\"")),
            };
            Ok(hb(branch, end))
        };
        let side = |s: &Value, key: &str| -> Result<Vec<HalfBranch>, TrackError> {
            s[key].as_array().ok_or_else(|| TrackError::Schema(format!("switch: missing `{key}`")))?.iter().map(find).collect()
        };
        let switches = v["switches"]
            .as_array()
            .ok_or_else(|| err("field `switches`: expected an array"))?
            .iter()
            .map(|s| {
                let cusps = match s.get("cusps") {
                    None => Vec::new(),
                    Some(c) => c
                        .as_array()
                        .ok_or_else(|| err("switch: `cusps` must be an array"))?
                        .iter()
                        .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| err("switch: cusp labels are region indices")))
                        .collect::<Result<_, _>>()?,
                };
                Ok(Switch { incoming: side(s, "incoming")?, outgoing: side(s, "outgoing")?, cusps })
            })
            .collect::<Result<_, TrackError>>()?;
        let field = |r: &Value, k: &str, default: Option<u32>| -> Result<u32, TrackError> {
            match r.get(k) {
                Some(x) => x.as_u64().map(|x| x as u32).ok_or_else(|| TrackError::Schema(format!("region: `{k}` must be a count"))),
                None => default.ok_or_else(|| TrackError::Schema(format!("region: missing `{k}`"))),
            }
        };
        let regions = match v.get("regions") {
            None => Vec::new(),
            Some(r) => r
                .as_array()
                .ok_or_else(|| err("field `regions`: expected an array"))?
                .iter()
                .map(|r| {
                    Ok(Region {
                        genus: field(r, "genus", None)?,
                        corners: field(r, "corners", None)?,
                        punctures: field(r, "punctures", None)?,
                        boundaries: field(r, "boundaries", Some(1))?,
                    })
                })
                .collect::<Result<_, TrackError>>()?,
        };
        Ok(TrainTrack { names, switches, regions })
    }
}

/// Checks the switch structure and the region census; returns the census
/// with the genus of the ambient surface, or the first problem found.
pub fn validate(track: &TrainTrack) -> Result<Census, TrackError> {
    track.check_structure()?;
    if track.regions.is_empty() {
        return Err(TrackError::NoCensus);
    }
    let corners: usize = track.switches.iter().map(Switch::corners).sum();
    let stated: usize = track.regions.iter().map(|r| r.corners as usize).sum();
    if stated != corners {
        return Err(TrackError::CornerTotal { stated, expected: corners });
    }
    if track.switches.iter().all(|s| !s.cusps.is_empty() || s.corners() == 0) {
        let mut labelled = vec![0usize; track.regions.len()];
        for s in &track.switches {
            for &c in &s.cusps {
                if c >= labelled.len() {
                    return Err(TrackError::Schema(format!("cusp label {c} names no region")));
                }
                labelled[c] += 1;
            }
        }
        for (i, r) in track.regions.iter().enumerate() {
            if r.corners as usize != labelled[i] {
                return Err(TrackError::CuspCount { region: i, stated: r.corners, labelled: labelled[i] });
            }
        }
    }
    let chi_track = track.switches.len() as i64 - track.branches() as i64;
    let chi_regions: i64 = track.regions.iter().map(Region::euler_characteristic).sum();
    let punctures: u32 = track.regions.iter().map(|r| r.punctures).sum();
    // χ(S) − P = χ(T) + Σ χ(regions), with χ(S) = 2 − 2g.
    let twice_genus = 2 - punctures as i64 - chi_track - chi_regions;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(TrackError::Euler(twice_genus));
    }
    if let Some((region, kind)) = track.regions.iter().enumerate().find_map(|(i, r)| r.forbidden().map(|k| (i, k))) {
        return Err(TrackError::Forbidden { region, kind });
    }
    Ok(Census { regions: track.regions.clone(), surface_genus: twice_genus / 2, punctures, corners })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwitchReport {
    /// Σ incoming − Σ outgoing at each switch.
    pub residuals: Vec<BigRational>,
}

impl SwitchReport {
    pub fn pass(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }
}

pub fn check_switch_conditions(track: &TrainTrack, weights: &[BigRational]) -> Result<SwitchReport, TrackError> {
    if weights.len() != track.branches() {
        return Err(TrackError::WeightCount(weights.len(), track.branches()));
    }
    let sum = |v: &[HalfBranch]| v.iter().map(|h| &weights[h.branch]).fold(BigRational::zero(), |a, b| a + b);
    Ok(SwitchReport { residuals: track.switches.iter().map(|s| sum(&s.incoming) - sum(&s.outgoing)).collect() })
}

/// Float weights pass when every residual is within `tol` times the largest weight.
pub fn check_switch_conditions_f64(track: &TrainTrack, weights: &[f64], tol: f64) -> Result<(Vec<f64>, bool), TrackError> {
    if weights.len() != track.branches() {
        return Err(TrackError::WeightCount(weights.len(), track.branches()));
    }
    let sum = |v: &[HalfBranch]| v.iter().map(|h| weights[h.branch]).sum::<f64>();
    let res: Vec<f64> = track.switches.iter().map(|s| sum(&s.incoming) - sum(&s.outgoing)).collect();
    let scale = weights.iter().fold(1.0f64, |a, w| a.max(w.abs()));
    let pass = res.iter().all(|r| r.abs() <= tol * scale);
    Ok((res, pass))
}

pub fn weights_to_json(track: &TrainTrack, w: &[BigRational]) -> Value {
    let map: serde_json::Map<String, Value> = track.names.iter().cloned().zip(w.iter().map(rational)).collect();
    json!({ "schema": "teichlab.weights/1", "weights": map })
}

/// Reads `{"weights": {name: decimal}}`; every branch needs a weight.
pub fn weights_from_json(track: &TrainTrack, v: &Value) -> Result<Vec<BigRational>, TrackError> {
    check_schema(v, "teichlab.weights").map_err(TrackError::Schema)?;
    let map = v["weights"].as_object().ok_or_else(|| TrackError::Schema("field `weights`: expected an object".into()))?;
    track
        .names
        .iter()
        .map(|n| {
            let x = map.get(n).ok_or_else(|| TrackError::Schema(format!("no weight for branch `{n}`")))?;
            let text = match x {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(TrackError::Schema(format!("weight of `{n}` must be a decimal"))),
            };
            let w = parse_rational(&text).ok_or_else(|| TrackError::Schema(format!("weight of `{n}`: invalid decimal `{text}`")))?;
            if w.is_negative() {
                return Err(TrackError::Schema(format!("weight of `{n}` is negative")));
            }
            Ok(w)
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimensionError {
    #[error("unsupported combination g={g}, k={k}, l={l}")]
    Unsupported { g: u32, k: usize, l: u32 },
    #[error("{0} cusp counts given for {1} crowns")]
    CrownCount(usize, usize),
    #[error("a crown needs at least one cusp")]
    EmptyCrown,
}

/// Real dimension of the space of crowned hyperbolic surfaces of genus `g`
/// with `l` closed geodesic boundaries and crowns with `m[i]` cusps.
pub fn crowned_dimension(g: u32, k: usize, l: u32, m: &[u32]) -> Result<i64, DimensionError> {
    if m.len() != k {
        return Err(DimensionError::CrownCount(m.len(), k));
    }
    if m.contains(&0) {
        return Err(DimensionError::EmptyCrown);
    }
    if g >= 1 {
        Ok(6 * g as i64 - 6 + 3 * l as i64 + m.iter().map(|&x| x as i64 + 3).sum::<i64>())
    } else if k == 1 && l == 0 && m[0] >= 3 {
        Ok(m[0] as i64 - 3)
    } else {
        Err(DimensionError::Unsupported { g, k, l })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::collections::HashMap;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// Regions read off the ribbon structure of the switches: faces of the
    /// fat graph, with a corner wherever a face turns between two
    /// half-branches on the same side.
    fn faces_from_rotation(t: &TrainTrack) -> (usize, Vec<usize>) {
        let mut pos = HashMap::new();
        let rots: Vec<Vec<(HalfBranch, bool)>> = t.switches.iter().map(Switch::rotation).collect();
        for (s, r) in rots.iter().enumerate() {
            for (i, &(h, _)) in r.iter().enumerate() {
                pos.insert(h, (s, i));
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut corners = Vec::new();
        for r in &rots {
            for &(h0, _) in r {
                if seen.contains(&h0) {
                    continue;
                }
                let (mut h, mut c) = (h0, 0);
                while seen.insert(h) {
                    let (s, i) = pos[&hb(h.branch, h.end.other())];
                    let r = &rots[s];
                    let next = r[(i + 1) % r.len()];
                    if r[i].1 == next.1 {
                        c += 1;
                    }
                    h = next.0;
                }
                corners.push(c);
            }
        }
        corners.sort();
        let genus = (2 - t.switches.len() as i64 + t.branches() as i64 - corners.len() as i64) / 2;
        (genus as usize, corners)
    }

    #[test]
    fn two_branch_track_is_a_punctured_bigon_on_a_torus() {
        let t = catalog::torus_track();
        let c = validate(&t).unwrap();
        assert_eq!(c.surface_genus, 1);
        assert_eq!(c.regions, vec![Region::new(0, 2, 1)]);
        assert_eq!(faces_from_rotation(&t), (1, vec![2]));
    }

    #[test]
    fn petal_track_has_a_punctured_m_gon() {
        for m in 2..=6 {
            let t = catalog::petal_track(m);
            let c = validate(&t).unwrap();
            assert_eq!(c.surface_genus, m as i64 + 2);
            assert!(c.regions.contains(&Region::new(0, m as u32, 1)));
            let (genus, mut corners) = faces_from_rotation(&t);
            assert_eq!(genus, 0);
            let mut stated: Vec<usize> = c.regions.iter().map(|r| r.corners as usize).collect();
            stated.sort();
            corners.sort();
            assert_eq!(corners, stated);
            // On the sphere itself the petals are once-punctured monogons.
            let e = validate(&catalog::petal_sphere_track(m)).unwrap_err();
            assert!(matches!(e, TrackError::Forbidden { kind: "once-punctured monogon", .. }), "{e}");
        }
    }

    #[test]
    fn bigon_region_is_rejected() {
        let s0 = Switch { incoming: vec![hb(2, BranchEnd::End)], outgoing: vec![hb(0, BranchEnd::Start), hb(1, BranchEnd::Start)], cusps: vec![1] };
        let s1 = Switch { incoming: vec![hb(0, BranchEnd::End), hb(1, BranchEnd::End)], outgoing: vec![hb(2, BranchEnd::Start)], cusps: vec![1] };
        let t = TrainTrack {
            names: vec!["x".into(), "y".into(), "z".into()],
            switches: vec![s0, s1],
            regions: vec![Region { genus: 1, corners: 0, punctures: 0, boundaries: 2 }, Region::new(0, 2, 0)],
        };
        assert_eq!(validate(&t).unwrap_err(), TrackError::Forbidden { region: 1, kind: "bigon" });
    }

    #[test]
    fn switch_conditions_report_residuals() {
        let t = catalog::torus_track();
        assert!(check_switch_conditions(&t, &[q(5), q(2), q(3)]).unwrap().pass());
        let r = check_switch_conditions(&t, &[q(5), q(2), q(2)]).unwrap();
        assert!(!r.pass());
        assert!(r.residuals.iter().all(|x| x.abs() == q(1)));
        for m in 2..=5 {
            let t = catalog::petal_track(m);
            let mut w = vec![q(m as i64 + 1)];
            w.extend(std::iter::repeat(q(1)).take(m + 1));
            assert!(check_switch_conditions(&t, &w).unwrap().pass());
        }
        let (_, ok) = check_switch_conditions_f64(&t, &[0.3, 0.1, 0.2], 1e-12).unwrap();
        assert!(ok);
    }

    #[test]
    fn json_round_trip() {
        let t = catalog::petal_track(3);
        assert_eq!(TrainTrack::from_json(&t.to_json()).unwrap(), t);
        let w = vec![q(4), q(1), q(1), q(1), q(1)];
        assert_eq!(weights_from_json(&t, &weights_to_json(&t, &w)).unwrap(), w);
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(crowned_dimension(1, 1, 0, &[4]), Ok(7));
        assert_eq!(crowned_dimension(0, 1, 0, &[3]), Ok(0));
        assert_eq!(crowned_dimension(2, 2, 1, &[1, 2]), Ok(18));
        assert!(crowned_dimension(0, 2, 0, &[3, 3]).is_err());
        assert!(crowned_dimension(0, 1, 0, &[2]).is_err());
    }
}
