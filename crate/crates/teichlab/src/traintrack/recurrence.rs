//! Recurrence by exact linear feasibility; transverse recurrence by certificate.

use super::{check_switch_conditions, validate, TrackError, TrainTrack};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

/// A complementary region of the track together with a dual multicurve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
pub struct CertRegion {
    pub genus: u32,
    pub punctures: u32,
    /// Cusps of the track on the boundary.
    pub cusps: u32,
    /// Arcs of the multicurve on the boundary.
    pub arcs: u32,
}

impl CertRegion {
    fn is_bigon(&self) -> bool {
        self.genus == 0 && self.punctures == 0 && self.cusps == 0 && self.arcs == 1
    }
}

/// A multicurve given by the branches it crosses (with multiplicity) and the
/// census of the regions cut out by the track and the curve together.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct TransverseCertificate {
    pub crossings: Vec<usize>,
    pub regions: Vec<CertRegion>,
}

impl TransverseCertificate {
    pub fn to_json(&self) -> Value {
        let regions: Vec<Value> = self
            .regions
            .iter()
            .map(|r| json!({ "genus": r.genus, "punctures": r.punctures, "cusps": r.cusps, "arcs": r.arcs }))
            .collect();
        json!({ "schema": "teichlab.certificate/1", "crossings": self.crossings, "regions": regions })
    }

    pub fn from_json(v: &Value) -> Result<Self, TrackError> {
        crate::json::check_schema(v, "teichlab.certificate").map_err(TrackError::Schema)?;
        TransverseCertificate::deserialize(v).map_err(|e| TrackError::Schema(e.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("region {region} is a bigon between the curve and the track")]
    Bigon { region: usize },
    #[error("certificate regions have {found} cusps, the track has {expected}")]
    Cusps { found: usize, expected: usize },
    #[error("certificate regions have {found} arc sides, expected twice the {crossings} crossings")]
    Arcs { found: usize, crossings: usize },
    #[error("certificate census has Euler characteristic {found}, expected {expected}")]
    Euler { found: i64, expected: i64 },
    #[error("crossing names branch {0}, which does not exist")]
    BadBranch(usize),
    #[error(transparent)]
    Track(#[from] TrackError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence {
    pub recurrent: bool,
    /// `None` without a certificate.
    pub transversely_recurrent: Option<bool>,
    /// Strictly positive weights, when recurrent.
    pub witness: Option<Vec<BigRational>>,
}

impl Recurrence {
    pub fn to_json(&self) -> Value {
        json!({
            "recurrent": self.recurrent,
            "transversely_recurrent": match self.transversely_recurrent {
                Some(b) => json!(b),
                None => json!("unknown"),
            },
            "witness": self.witness.as_ref().map(|w| w.iter().map(crate::json::rational).collect::<Vec<_>>()),
        })
    }
}

pub fn is_birecurrent(track: &TrainTrack, cert: Option<&TransverseCertificate>) -> Result<Recurrence, CertificateError> {
    let witness = positive_weights(track);
    if let Some(w) = &witness {
        debug_assert!(check_switch_conditions(track, w).map(|r| r.pass()).unwrap_or(false));
    }
    let transversely_recurrent = match cert {
        None => None,
        Some(c) => Some(check_certificate(track, c)?),
    };
    Ok(Recurrence { recurrent: witness.is_some(), transversely_recurrent, witness })
}

fn check_certificate(track: &TrainTrack, c: &TransverseCertificate) -> Result<bool, CertificateError> {
    let census = validate(track)?;
    if let Some(&b) = c.crossings.iter().find(|&&b| b >= track.branches()) {
        return Err(CertificateError::BadBranch(b));
    }
    let cusps: usize = c.regions.iter().map(|r| r.cusps as usize).sum();
    if cusps != census.corners {
        return Err(CertificateError::Cusps { found: cusps, expected: census.corners });
    }
    let n = c.crossings.len();
    let arcs: usize = c.regions.iter().map(|r| r.arcs as usize).sum();
    if arcs != 2 * n {
        return Err(CertificateError::Arcs { found: arcs, crossings: n });
    }
    // Crossings subdivide branches and the curve alike: χ(T ∪ γ) = V − E − n.
    let chi_union = track.switches.len() as i64 - track.branches() as i64 - n as i64;
    let chi_surface = 2 - 2 * census.surface_genus - census.punctures as i64;
    let found: i64 = c.regions.iter().map(|r| 1 - 2 * r.genus as i64 - r.punctures as i64).sum();
    if found != chi_surface - chi_union {
        return Err(CertificateError::Euler { found, expected: chi_surface - chi_union });
    }
    if let Some(region) = c.regions.iter().position(CertRegion::is_bigon) {
        return Err(CertificateError::Bigon { region });
    }
    Ok((0..track.branches()).all(|b| c.crossings.contains(&b)))
}

/// Strictly positive solution of the switch conditions, if any: the cone is
/// invariant under scaling, so it suffices to find `w ≥ 1`.
fn positive_weights(track: &TrainTrack) -> Option<Vec<BigRational>> {
    let n = track.branches();
    let rows: Vec<Vec<BigRational>> = track
        .switches
        .iter()
        .map(|s| {
            let mut r = vec![BigRational::zero(); n];
            for h in &s.incoming {
                r[h.branch] += BigRational::one();
            }
            for h in &s.outgoing {
                r[h.branch] -= BigRational::one();
            }
            r
        })
        .collect();
    // Substitute w = 1 + x with x ≥ 0.
    let rhs: Vec<BigRational> = rows.iter().map(|r| -r.iter().fold(BigRational::zero(), |a, b| a + b)).collect();
    let x = feasible_point(&rows, &rhs)?;
    Some(x.into_iter().map(|v| v + BigRational::one()).collect())
}

/// A point of `{x ≥ 0 : A x = b}` by phase-one simplex with Bland's rule.
pub(crate) fn feasible_point(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let zero = BigRational::zero();
    // Tableau columns: n originals, m artificials, then the right-hand side.
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let sign = if b[i].is_negative() { -BigRational::one() } else { BigRational::one() };
            let mut row: Vec<BigRational> = a[i].iter().map(|x| x * &sign).collect();
            row.extend((0..m).map(|j| if i == j { BigRational::one() } else { zero.clone() }));
            row.push(&b[i] * &sign);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the phase-one objective Σ artificials.
    let mut cost: Vec<BigRational> = (0..=n + m)
        .map(|j| {
            let c = if (n..n + m).contains(&j) { BigRational::one() } else { zero.clone() };
            t.iter().fold(c, |acc, row| acc - &row[j])
        })
        .collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[n + m] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave?;
        let p = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x /= &p;
        }
        let pivot = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        let f = cost[enter].clone();
        for (x, y) in cost.iter_mut().zip(&pivot) {
            *x -= &f * y;
        }
        basis[r] = enter;
    }
    // The objective value is −cost[rhs].
    if !cost[n + m].is_zero() {
        return None;
    }
    let mut x = vec![zero; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][n + m].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::traintrack::{hb, BranchEnd, Region, Switch};

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn simplex_finds_feasible_points() {
        let a = vec![vec![q(1), q(1), q(0)], vec![q(0), q(1), q(1)]];
        let x = feasible_point(&a, &[q(2), q(3)]).unwrap();
        assert_eq!(&x[0] + &x[1], q(2));
        assert_eq!(&x[1] + &x[2], q(3));
        assert!(x.iter().all(|v| !v.is_negative()));
        assert!(feasible_point(&[vec![q(1), q(1)]], &[q(-1)]).is_none());
    }

    #[test]
    fn petal_track_is_birecurrent() {
        for m in 2..=6 {
            let t = catalog::petal_track(m);
            let r = is_birecurrent(&t, Some(&catalog::petal_certificate(m))).unwrap();
            assert!(r.recurrent);
            assert_eq!(r.transversely_recurrent, Some(true));
            assert!(r.witness.unwrap().iter().all(|w| w.is_positive()));
        }
    }

    #[test]
    fn no_certificate_means_unknown() {
        let r = is_birecurrent(&catalog::torus_track(), None).unwrap();
        assert!(r.recurrent);
        assert_eq!(r.transversely_recurrent, None);
    }

    #[test]
    fn zero_cone_is_not_recurrent() {
        // x enters alone and leaves together with y: y must vanish.
        use BranchEnd::{End, Start};
        let t = TrainTrack {
            names: vec!["x".into(), "y".into()],
            switches: vec![
                Switch { incoming: vec![hb(0, End)], outgoing: vec![hb(0, Start), hb(1, Start)], cusps: vec![] },
                Switch { incoming: vec![hb(1, End)], outgoing: vec![hb(1, Start)], cusps: vec![] },
            ],
            regions: vec![Region::new(1, 1, 0)],
        };
        let r = is_birecurrent(&t, None).unwrap();
        assert!(!r.recurrent);
    }

    #[test]
    fn certificate_json_round_trips() {
        let c = catalog::petal_certificate(4);
        assert_eq!(TransverseCertificate::from_json(&c.to_json()).unwrap(), c);
        let mut v = c.to_json();
        v["regions"][0]["arcs"] = json!(-1);
        assert!(matches!(TransverseCertificate::from_json(&v), Err(TrackError::Schema(_))));
    }

    #[test]
    fn bigon_in_certificate_is_reported() {
        let mut c = catalog::petal_certificate(3);
        // Move one cusp from a triangle onto a handle piece: every count
        // still balances but the triangle becomes a bigon.
        let i = c.regions.iter().position(|r| r.cusps == 1 && r.genus == 0).unwrap();
        c.regions[i].cusps = 0;
        let j = c.regions.iter().position(|r| r.genus == 1).unwrap();
        c.regions[j].cusps = 1;
        let err = is_birecurrent(&catalog::petal_track(3), Some(&c)).unwrap_err();
        assert_eq!(err, CertificateError::Bigon { region: i });
    }
}
