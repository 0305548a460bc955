//! Energy `𝓔 = ∫(H + L)` against the mass `‖Φ‖ = ∫|q|`.
//!
//! The integrand is split as `H + L = 2|q| + (√H − √L)²`, so the lower bound
//! `𝓔 ≥ 2‖Φ‖` is the positivity of the second term and the upper bound is a
//! statement about its integral. Both parts use the bilinear interpolant of
//! nodal values.

use super::{BochnerField, HarmonicError};
use crate::json::num;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: Complex64, radius: f64 },
    /// Points within Φ-distance `radius` of the zero of a monomial `a zⁿ`.
    PhiDisk { radius: f64 },
}

impl Region {
    pub fn to_json(&self) -> Value {
        match *self {
            Region::Rect { x0, x1, y0, y1 } => json!({"rect": [num(x0), num(x1), num(y0), num(y1)]}),
            Region::Disk { center, radius } => json!({"disk": {"center": [num(center.re), num(center.im)], "radius": num(radius)}}),
            Region::PhiDisk { radius } => json!({"phi_disk": {"radius": num(radius)}}),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub region: Region,
    /// `‖Φ‖`, in closed form for a Φ-disk.
    pub norm_phi: f64,
    pub norm_phi_exact: bool,
    /// `∫(√H − √L)²`, so that `𝓔 = 2‖Φ‖ + excess`.
    pub excess: f64,
    pub energy: f64,
    /// Euler characteristic of the region; every supported region is a disk.
    pub chi: i64,
    pub lower_bound_holds: bool,
    /// `2‖Φ‖ + 2πχ`, as printed.
    pub upper_signed: f64,
    /// `2‖Φ‖ + 2π|χ|`.
    pub upper_abs: f64,
    pub upper_bound_holds: bool,
    /// Slack allowed in the bound checks, as fractions of `‖Φ‖`.
    pub lower_tol: f64,
    pub upper_tol: f64,
}

impl EnergyReport {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.energy/1",
            "region": self.region.to_json(),
            "norm_phi": num(self.norm_phi),
            "norm_phi_exact": self.norm_phi_exact,
            "excess": num(self.excess),
            "energy": num(self.energy),
            "chi": self.chi,
            "lower_bound": num(2.0 * self.norm_phi),
            "lower_bound_holds": self.lower_bound_holds,
            "upper_bound_signed_chi": num(self.upper_signed),
            "upper_bound_abs_chi": num(self.upper_abs),
            "upper_bound_holds": self.upper_bound_holds,
            "lower_tol": num(self.lower_tol),
            "upper_tol": num(self.upper_tol),
        })
    }
}

/// `(√H − √L)² = 4|q| sinh²(u/2)` with `u = G − log|q|`.
fn excess_density(g: f64, qa: f64) -> f64 {
    if qa == 0.0 {
        return g.exp();
    }
    let u = g - qa.ln();
    if u.abs() < 30.0 {
        4.0 * qa * (0.5 * u).sinh().powi(2)
    } else {
        g.exp() + qa * qa * (-g).exp() - 2.0 * qa
    }
}

pub fn energy(field: &BochnerField, region: Region) -> Result<EnergyReport, HarmonicError> {
    let (n, h, o) = (field.nodes_per_side(), field.spacing(), field.origin());
    let top = o + (n - 1) as f64 * h;
    let q = field.hopf();
    let (disk, exact_norm) = match region {
        Region::Rect { x0, x1, y0, y1 } => {
            if !(x0 < x1 && y0 < y1) {
                return Err(HarmonicError::BadInput("empty rectangle".into()));
            }
            (None, None)
        }
        Region::Disk { center, radius } => (Some((center, radius)), None),
        Region::PhiDisk { radius } => {
            let (a, m) = q.as_monomial().ok_or(HarmonicError::NotMonomial)?;
            let k = (m + 2) as f64;
            let rho = (k * radius / (2.0 * a.norm().sqrt())).powf(2.0 / k);
            (Some((Complex64::new(0.0, 0.0), rho)), Some(PI * k * radius * radius / 2.0))
        }
    };
    let (bx0, bx1, by0, by1) = match (region, disk) {
        (Region::Rect { x0, x1, y0, y1 }, _) => (x0, x1, y0, y1),
        (_, Some((c, r))) => (c.re - r, c.re + r, c.im - r, c.im + r),
        _ => unreachable!(),
    };
    if !(bx0 >= o && by0 >= o && bx1 <= top && by1 <= top) || disk.is_some_and(|(_, r)| !(r > 0.0)) {
        return Err(HarmonicError::BadInput(format!("region {} exceeds the grid", region.to_json())));
    }
    let qa: Vec<f64> = (0..n * n).map(|k| q.eval(field.node(k % n, k / n)).norm()).collect();
    let ex: Vec<f64> = field.log_densities().iter().zip(&qa).map(|(&g, &a)| excess_density(g, a)).collect();
    let (mut mass, mut excess) = (0.0, 0.0);
    let lo = |t: f64| ((t - o) / h).floor().max(0.0) as usize;
    for j in lo(by0)..lo(by1).min(n - 2) + 1 {
        for i in lo(bx0)..lo(bx1).min(n - 2) + 1 {
            let (cx, cy) = (o + i as f64 * h, o + j as f64 * h);
            let k = j * n + i;
            let corners = |d: &[f64]| [d[k], d[k + 1], d[k + n], d[k + n + 1]];
            let (fq, fe) = (corners(&qa), corners(&ex));
            let weights = match disk {
                None => rect_weights((cx, cy), h, (bx0, bx1, by0, by1)),
                Some((c, r)) => disk_weights((cx, cy), h, c, r),
            };
            let Some(w) = weights else { continue };
            for t in 0..4 {
                mass += w[t] * fq[t];
                excess += w[t] * fe[t];
            }
        }
    }
    let norm_phi = exact_norm.unwrap_or(mass);
    let energy = 2.0 * norm_phi + excess;
    let chi = 1;
    let (lower_tol, upper_tol) = (1e-6, 1e-3);
    let upper_signed = 2.0 * norm_phi + 2.0 * PI * chi as f64;
    let upper_abs = 2.0 * norm_phi + 2.0 * PI * (chi as f64).abs();
    Ok(EnergyReport {
        region,
        norm_phi,
        norm_phi_exact: exact_norm.is_some(),
        excess,
        energy,
        chi,
        lower_bound_holds: energy >= 2.0 * norm_phi - lower_tol * norm_phi,
        upper_signed,
        upper_abs,
        upper_bound_holds: energy <= upper_abs.min(upper_signed) + upper_tol * norm_phi,
        lower_tol,
        upper_tol,
    })
}

/// Weights of the corner values `[00, 10, 01, 11]` in the exact integral of
/// the bilinear interpolant over the part of the cell inside the rectangle.
fn rect_weights((cx, cy): (f64, f64), h: f64, (x0, x1, y0, y1): (f64, f64, f64, f64)) -> Option<[f64; 4]> {
    let (sa, sb) = (((x0 - cx) / h).max(0.0), ((x1 - cx) / h).min(1.0));
    let (ta, tb) = (((y0 - cy) / h).max(0.0), ((y1 - cy) / h).min(1.0));
    if sa >= sb || ta >= tb {
        return None;
    }
    let lin = |a: f64, b: f64| ((b - a) - (b * b - a * a) / 2.0, (b * b - a * a) / 2.0);
    let (a0, a1) = lin(sa, sb);
    let (b0, b1) = lin(ta, tb);
    let h2 = h * h;
    Some([h2 * a0 * b0, h2 * a1 * b0, h2 * a0 * b1, h2 * a1 * b1])
}

/// Cells inside the disk use the exact bilinear integral; cells crossing its
/// boundary are sampled at 8 × 8 midpoints.
fn disk_weights((cx, cy): (f64, f64), h: f64, c: Complex64, r: f64) -> Option<[f64; 4]> {
    let inside = |x: f64, y: f64| (x - c.re).powi(2) + (y - c.im).powi(2) <= r * r;
    let all = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)].iter().all(|&(a, b)| inside(cx + a * h, cy + b * h));
    let h2 = h * h;
    if all {
        return Some([h2 / 4.0; 4]);
    }
    let (nx, ny) = ((c.re.clamp(cx, cx + h) - c.re), (c.im.clamp(cy, cy + h) - c.im));
    if nx * nx + ny * ny > r * r {
        return None;
    }
    const S: usize = 8;
    let mut w = [0.0; 4];
    for b in 0..S {
        let t = (b as f64 + 0.5) / S as f64;
        for a in 0..S {
            let s = (a as f64 + 0.5) / S as f64;
            if inside(cx + s * h, cy + t * h) {
                let cell = h2 / (S * S) as f64;
                w[0] += cell * (1.0 - s) * (1.0 - t);
                w[1] += cell * s * (1.0 - t);
                w[2] += cell * (1.0 - s) * t;
                w[3] += cell * s * t;
            }
        }
    }
    Some(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{solve_bochner, PolynomialHopf, SolverConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_metric_has_energy_twice_the_mass() {
        let q = PolynomialHopf::new(vec![c(1.0, 0.0)]).unwrap();
        let f = solve_bochner(&q, 1.3, &SolverConfig { grid: 40, ..Default::default() }).unwrap();
        let r = energy(&f, Region::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }).unwrap();
        assert!((r.norm_phi - 1.0).abs() < 1e-12);
        assert_eq!(r.excess, 0.0);
        assert!((r.energy - 2.0).abs() < 1e-12);
        assert!(r.lower_bound_holds && r.upper_bound_holds);
        let d = energy(&f, Region::Disk { center: c(0.1, 0.0), radius: 1.0 }).unwrap();
        assert!((d.norm_phi - PI).abs() < 1e-3, "{}", d.norm_phi);
    }

    #[test]
    fn mass_of_a_phi_disk_matches_its_quadrature() {
        let q = PolynomialHopf::monomial(c(0.0, 2.0), 2).unwrap();
        let f = solve_bochner(&q, 3.0, &SolverConfig { grid: 128, ..Default::default() }).unwrap();
        let exact = energy(&f, Region::PhiDisk { radius: 2.0 }).unwrap();
        // Φ-radius 2 for |a| = 2, n = 2 is the Euclidean radius √(2·2/√2).
        let rho = (4.0 / 2f64.sqrt()).sqrt();
        let quad = energy(&f, Region::Disk { center: c(0.0, 0.0), radius: rho }).unwrap();
        assert!((exact.norm_phi - 4.0 * PI * 2.0).abs() < 1e-12);
        assert!((quad.norm_phi / exact.norm_phi - 1.0).abs() < 1e-3);
        assert_eq!(quad.excess, exact.excess);
    }

    #[test]
    fn energy_grows_with_the_region_and_regions_must_fit() {
        let q = PolynomialHopf::monomial(c(1.0, 0.0), 3).unwrap();
        let f = solve_bochner(&q, 2.5, &SolverConfig { grid: 80, ..Default::default() }).unwrap();
        let es: Vec<f64> = [0.5, 1.0, 1.5, 2.0].iter().map(|&r| energy(&f, Region::Disk { center: c(0.0, 0.0), radius: r }).unwrap().energy).collect();
        assert!(es.windows(2).all(|w| w[0] < w[1]));
        assert!(energy(&f, Region::Disk { center: c(0.0, 0.0), radius: 2.6 }).is_err());
        assert!(energy(&f, Region::PhiDisk { radius: 1.0 }).unwrap().lower_bound_holds);
    }
}
