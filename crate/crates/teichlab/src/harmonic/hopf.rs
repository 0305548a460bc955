//! Polynomial quadratic differentials `q(z) dz²` and their zeros.

use super::HarmonicError;
use crate::json::{num, DecimalOrInf};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialHopf {
    /// `a_k` is the coefficient of `z^k`; the last one is nonzero.
    coeffs: Vec<Complex64>,
    /// Distinct zeros with multiplicity, sorted by real then imaginary part.
    zeros: Vec<(Complex64, usize)>,
}

impl PolynomialHopf {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self, HarmonicError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(HarmonicError::BadInput("coefficients must be finite".into()));
        }
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(HarmonicError::ZeroPolynomial);
        }
        let zeros = find_zeros(&coeffs)?;
        Ok(PolynomialHopf { coeffs, zeros })
    }

    /// `a zⁿ`.
    pub fn monomial(a: Complex64, n: usize) -> Result<Self, HarmonicError> {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = a;
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn zeros(&self) -> &[(Complex64, usize)] {
        &self.zeros
    }

    /// `(a, n)` when `q = a zⁿ`.
    pub fn as_monomial(&self) -> Option<(Complex64, usize)> {
        let n = self.degree();
        self.coeffs[..n].iter().all(|c| c.norm() == 0.0).then(|| (self.coeffs[n], n))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `(q(z), q'(z))`.
    pub fn eval_d(&self, z: Complex64) -> (Complex64, Complex64) {
        horner_d(&self.coeffs, z)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.hopf/1",
            "coefficients": self.coeffs.iter().map(|c| json!([num(c.re), num(c.im)])).collect::<Vec<_>>(),
            "zeros": self.zeros.iter().map(|(z, m)| json!({"at": [num(z.re), num(z.im)], "multiplicity": m})).collect::<Vec<_>>(),
        })
    }

    /// Reads `{"coefficients": [[re, im], ...]}`, lowest degree first; a bare
    /// number stands for a real coefficient.
    pub fn from_json(v: &Value) -> Result<Self, HarmonicError> {
        crate::json::check_schema(v, "teichlab.hopf").map_err(HarmonicError::Schema)?;
        let arr = v
            .get("coefficients")
            .and_then(Value::as_array)
            .ok_or_else(|| HarmonicError::Schema("field `coefficients`: expected an array".into()))?;
        let real = |x: &Value, k: usize| -> Result<f64, HarmonicError> {
            match DecimalOrInf::deserialize(x) {
                Ok(DecimalOrInf::Finite(f)) => Ok(f),
                _ => Err(HarmonicError::Schema(format!("field `coefficients[{k}]`: expected a finite number"))),
            }
        };
        let coeffs = arr
            .iter()
            .enumerate()
            .map(|(k, c)| match c.as_array() {
                Some(p) if p.len() == 2 => Ok(Complex64::new(real(&p[0], k)?, real(&p[1], k)?)),
                Some(_) => Err(HarmonicError::Schema(format!("field `coefficients[{k}]`: expected [re, im]"))),
                None => Ok(Complex64::new(real(c, k)?, 0.0)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coeffs)
    }
}

fn horner_d(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    p.iter().rev().fold((zero, zero), |(v, d), c| (v * z + c, d * z + v))
}

/// The `j`-th derivative as a coefficient list.
fn derivative(p: &[Complex64], j: usize) -> Vec<Complex64> {
    (j..p.len())
        .map(|k| p[k] * ((k - j + 1..=k).map(|f| f as f64).product::<f64>()))
        .collect()
}

fn magnitude(p: &[Complex64], z: Complex64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.norm())
}

/// Aberth iteration for all roots, then clusters of nearby roots are merged
/// into multiple roots and polished by Newton steps on the derivative that
/// has them as simple roots.
fn find_zeros(coeffs: &[Complex64]) -> Result<Vec<(Complex64, usize)>, HarmonicError> {
    let k0 = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let p = &coeffs[k0..];
    let mut zeros = Vec::new();
    if k0 > 0 {
        zeros.push((Complex64::new(0.0, 0.0), k0));
    }
    if p.len() > 1 {
        let roots = aberth(p);
        let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.norm()));
        let mut used = vec![false; roots.len()];
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let cluster: Vec<usize> =
                (i..roots.len()).filter(|&j| !used[j] && (roots[j] - roots[i]).norm() < 1e-4 * scale).collect();
            cluster.iter().for_each(|&j| used[j] = true);
            let m = cluster.len();
            let mean = cluster.iter().map(|&j| roots[j]).sum::<Complex64>() / m as f64;
            match polish_multiple(p, mean, m) {
                Some(z) => zeros.push((z, m)),
                None => {
                    for &j in &cluster {
                        zeros.push((newton(p, roots[j]), 1));
                    }
                }
            }
        }
    }
    for &(z, _) in &zeros {
        let v = horner_d(coeffs, z).0.norm();
        if v > 1e-9 * magnitude(coeffs, z) {
            return Err(HarmonicError::ZeroValidation { re: z.re, im: z.im, residual: v });
        }
    }
    zeros.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(zeros)
}

fn aberth(p: &[Complex64]) -> Vec<Complex64> {
    let d = p.len() - 1;
    let r0 = (p[0].norm() / p[d].norm()).powf(1.0 / d as f64);
    let mut z: Vec<Complex64> =
        (0..d).map(|k| Complex64::from_polar(r0, std::f64::consts::TAU * k as f64 / d as f64 + 0.4)).collect();
    for _ in 0..2000 {
        let mut worst = 0.0_f64;
        for i in 0..d {
            let (v, dv) = horner_d(p, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if !w.is_finite() {
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm());
                z[i] += bump;
                worst = f64::INFINITY;
                continue;
            }
            z[i] -= w;
            worst = worst.max(w.norm() / (1.0 + z[i].norm()));
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

fn newton(p: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (v, dv) = horner_d(p, z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.is_finite() {
            break;
        }
        z -= step;
    }
    z
}

/// A root of multiplicity `m` is a simple root of the `(m−1)`-th derivative;
/// `None` when the lower derivatives do not vanish there.
fn polish_multiple(p: &[Complex64], z0: Complex64, m: usize) -> Option<Complex64> {
    if m == 1 {
        return Some(newton(p, z0));
    }
    let z = newton(&derivative(p, m - 1), z0);
    (0..m - 1)
        .all(|j| {
            let dj = derivative(p, j);
            horner_d(&dj, z).0.norm() <= 1e-8 * magnitude(&dj, z)
        })
        .then_some(z)
}
