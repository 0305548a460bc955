//! Hyperbolic geometry in the upper half-plane: Möbius maps, cross-ratios,
//! ideal polygons in shear coordinates, crown ends and their metric residues,
//! and geodesic curvature of sampled curves.

use crate::json::{check_schema, num, DecimalOrInf};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrownError {
    #[error("points {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("matrix has determinant {0}; a Möbius map needs a positive one")]
    Determinant(f64),
    #[error("ideal points are not in counterclockwise cyclic order")]
    NotCyclic,
    #[error("an ideal polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("{found} shears given, an ideal {n}-gon takes {expected}")]
    ShearCount { n: usize, expected: usize, found: usize },
    #[error("horocycles at cusps {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("{found} horocycles given for {expected} cusps")]
    HorocycleCount { expected: usize, found: usize },
    #[error("horocycle size must be positive, got {0}")]
    BadHorocycle(f64),
    #[error("curve needs at least 5 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {0} is degenerate (repeated or off the half-plane)")]
    DegenerateSample(usize),
    #[error("{0}")]
    Schema(String),
}

/// A point of ℝ ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IdealPoint {
    Finite(f64),
    Infinity,
}

impl IdealPoint {
    /// The boundary point at angle `theta` of the unit disk, under the Cayley
    /// map `w ↦ i(1 + w)/(1 − w)`; angle 0 goes to ∞.
    pub fn from_disk_angle(theta: f64) -> Self {
        let half = theta.rem_euclid(std::f64::consts::TAU) / 2.0;
        if half == 0.0 {
            IdealPoint::Infinity
        } else {
            IdealPoint::Finite(-1.0 / half.tan())
        }
    }

    /// Angle on the unit circle, inverse of [`IdealPoint::from_disk_angle`].
    pub fn disk_angle(self) -> f64 {
        match self {
            IdealPoint::Infinity => 0.0,
            IdealPoint::Finite(x) => 2.0 * (-1.0 / x).atan().rem_euclid(std::f64::consts::PI),
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            IdealPoint::Infinity => json!("inf"),
            IdealPoint::Finite(x) => num(x),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, CrownError> {
        match DecimalOrInf::deserialize(v).map_err(|e| CrownError::Schema(e.to_string()))? {
            DecimalOrInf::Infinite => Ok(IdealPoint::Infinity),
            DecimalOrInf::Finite(x) => Ok(IdealPoint::Finite(x)),
        }
    }
}

/// `z ↦ (az + b)/(cz + d)` with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, CrownError> {
        let det = a * d - b * c;
        if !(det > 0.0 && det.is_finite()) {
            return Err(CrownError::Determinant(det));
        }
        let s = det.sqrt();
        Ok(MobiusMap { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        MobiusMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `z ↦ e^l z`, translating by `l` along the imaginary axis.
    pub fn hyperbolic(l: f64) -> Self {
        MobiusMap { a: (l / 2.0).exp(), b: 0.0, c: 0.0, d: (-l / 2.0).exp() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn apply(&self, p: IdealPoint) -> IdealPoint {
        match p {
            IdealPoint::Infinity if self.c == 0.0 => IdealPoint::Infinity,
            IdealPoint::Infinity => IdealPoint::Finite(self.a / self.c),
            IdealPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Action on a point `x + iy` of the half-plane.
    pub fn apply_interior(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (nr, ni) = (self.a * x + self.b, self.a * y);
        let (dr, di) = (self.c * x + self.d, self.c * y);
        let q = dr * dr + di * di;
        ((nr * dr + ni * di) / q, (ni * dr - nr * di) / q)
    }

    /// The map sending `p, q, r` to `0, 1, ∞`, when the triple is positively ordered.
    pub fn normalizing(p: IdealPoint, q: IdealPoint, r: IdealPoint) -> Result<Self, CrownError> {
        use IdealPoint::{Finite as F, Infinity as I};
        let m = match (p, q, r) {
            (I, F(q), F(r)) => (0.0, q - r, 1.0, -r),
            (F(p), I, F(r)) => (1.0, -p, 1.0, -r),
            (F(p), F(q), I) => (1.0, -p, 0.0, q - p),
            (F(p), F(q), F(r)) => (q - r, -p * (q - r), q - p, -r * (q - p)),
            _ => return Err(CrownError::Coincident(0, 1)),
        };
        MobiusMap::new(m.0, m.1, m.2, m.3).map_err(|_| CrownError::NotCyclic)
    }
}

/// `(s − p)(q − r) / ((s − r)(q − p))`, so that `(0, 1, ∞, x) ↦ x`.
pub fn cross_ratio(p: IdealPoint, q: IdealPoint, r: IdealPoint, s: IdealPoint) -> Result<f64, CrownError> {
    let pts = [p, q, r, s];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(CrownError::Coincident(i, j));
            }
        }
    }
    use IdealPoint::{Finite as F, Infinity as I};
    Ok(match pts {
        [I, F(q), F(r), F(s)] => (q - r) / (s - r),
        [F(p), I, F(r), F(s)] => (s - p) / (s - r),
        [F(p), F(q), I, F(s)] => (s - p) / (q - p),
        [F(p), F(q), F(r), I] => (q - r) / (q - p),
        [F(p), F(q), F(r), F(s)] => (s - p) * (q - r) / ((s - r) * (q - p)),
        _ => unreachable!("at most one point is infinite"),
    })
}

/// Whether the points run once counterclockwise around the circle at infinity.
fn is_cyclic(v: &[IdealPoint]) -> bool {
    let tau = std::f64::consts::TAU;
    let turn: f64 = (0..v.len()).map(|i| (v[(i + 1) % v.len()].disk_angle() - v[i].disk_angle()).rem_euclid(tau)).sum();
    (turn - tau).abs() < 1e-9
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealPolygon {
    pub vertices: Vec<IdealPoint>,
}

impl IdealPolygon {
    pub fn new(vertices: Vec<IdealPoint>) -> Result<Self, CrownError> {
        let n = vertices.len();
        if n < 3 {
            return Err(CrownError::TooFewVertices(n));
        }
        for i in 0..n {
            for j in i + 1..n {
                if vertices[i] == vertices[j] {
                    return Err(CrownError::Coincident(i, j));
                }
            }
        }
        if !is_cyclic(&vertices) {
            return Err(CrownError::NotCyclic);
        }
        Ok(IdealPolygon { vertices })
    }

    pub fn shear_count(&self) -> usize {
        self.vertices.len() - 3
    }

    /// Shears along the fan diagonals from vertex 0.
    pub fn shears(&self) -> Vec<f64> {
        let v = &self.vertices;
        (0..self.shear_count())
            .map(|k| {
                let x = cross_ratio(v[0], v[k + 1], v[k + 2], v[k + 3]).expect("distinct vertices");
                -(-x).ln()
            })
            .collect()
    }

    pub fn transform(&self, m: &MobiusMap) -> IdealPolygon {
        IdealPolygon { vertices: self.vertices.iter().map(|&p| m.apply(p)).collect() }
    }

    /// Cross-ratios of the `n` cyclic windows of four consecutive vertices.
    pub fn cyclic_cross_ratios(&self) -> Vec<f64> {
        let v = &self.vertices;
        let n = v.len();
        (0..n).map(|i| cross_ratio(v[i], v[(i + 1) % n], v[(i + 2) % n], v[(i + 3) % n]).expect("distinct vertices")).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.polygon/1",
            "vertices": self.vertices.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "shears": self.shears().into_iter().map(num).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CrownError> {
        check_schema(v, "teichlab.polygon").map_err(CrownError::Schema)?;
        let pts = v["vertices"].as_array().ok_or_else(|| CrownError::Schema("field `vertices`: expected an array".into()))?;
        IdealPolygon::new(pts.iter().map(IdealPoint::from_json).collect::<Result<_, _>>()?)
    }
}

/// Ideal `n`-gon with vertex 0 at ∞ and the others increasing along ℝ. The
/// fan cross-ratio across the diagonal `(v₀, v_{k+2})` is minus the ratio of
/// consecutive gaps, `−g_k/g_{k+1} = −e^{−s_k}`, so a positive shear
/// increases the cross-ratio. The origin is put at the vertex that keeps
/// every gap largest relative to the positions of its ends.
pub fn polygon_from_shears(n: usize, shears: &[f64]) -> Result<IdealPolygon, CrownError> {
    if n < 3 {
        return Err(CrownError::TooFewVertices(n));
    }
    if shears.len() != n - 3 {
        return Err(CrownError::ShearCount { n, expected: n - 3, found: shears.len() });
    }
    let mut gaps = vec![1.0];
    for &s in shears {
        gaps.push(gaps[gaps.len() - 1] * s.exp());
    }
    let place = |anchor: usize| {
        let mut x = vec![0.0; n - 1];
        for i in anchor + 1..n - 1 {
            x[i] = x[i - 1] + gaps[i - 1];
        }
        for i in (0..anchor).rev() {
            x[i] = x[i + 1] - gaps[i];
        }
        x
    };
    let cost = |x: &[f64]| (0..gaps.len()).map(|i| (x[i].abs() + x[i + 1].abs()) / gaps[i]).fold(0.0, f64::max);
    let x = (0..n - 1).map(place).min_by(|a, b| cost(a).total_cmp(&cost(b))).expect("at least two finite vertices");
    let mut v = vec![IdealPoint::Infinity];
    v.extend(x.into_iter().map(IdealPoint::Finite));
    IdealPolygon::new(v)
}

pub fn shears_from_polygon(p: &IdealPolygon) -> Vec<f64> {
    p.shears()
}

/// A horocycle: Euclidean diameter at a finite base point, height at ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Horocycle {
    pub base: IdealPoint,
    pub size: f64,
}

impl Horocycle {
    pub fn transform(&self, m: &MobiusMap) -> Horocycle {
        // The derivative of m at a finite point x is 1/(cx + d)².
        let size = match self.base {
            IdealPoint::Infinity if m.c == 0.0 => self.size * m.a * m.a,
            IdealPoint::Infinity => 1.0 / (m.c * m.c * self.size),
            IdealPoint::Finite(x) => {
                let den = m.c * x + m.d;
                if den == 0.0 {
                    1.0 / (m.c * m.c * self.size)
                } else {
                    self.size / (den * den)
                }
            }
        };
        Horocycle { base: m.apply(self.base), size }
    }
}

/// Signed length of the geodesic between two horocycles, outside both;
/// negative when they overlap.
pub fn horocycle_gap(h: &Horocycle, k: &Horocycle) -> f64 {
    match (h.base, k.base) {
        (IdealPoint::Infinity, IdealPoint::Finite(_)) => (h.size / k.size).ln(),
        (IdealPoint::Finite(_), IdealPoint::Infinity) => (k.size / h.size).ln(),
        (IdealPoint::Finite(a), IdealPoint::Finite(b)) => ((a - b) * (a - b) / (h.size * k.size)).ln(),
        _ => f64::NEG_INFINITY,
    }
}

/// Distance between two points of the half-plane.
pub fn hyperbolic_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let d2 = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
    2.0 * (d2.sqrt() / (2.0 * (p.1 * q.1).sqrt())).asinh()
}

/// A crown end lifted to the half-plane: side `i` runs from cusp `i` to cusp
/// `i + 1`, and the last side ends at `holonomy(cusps[0])`. The identity
/// holonomy closes the crown into an ideal polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct CrownEnd {
    pub cusps: Vec<IdealPoint>,
    pub holonomy: MobiusMap,
}

impl CrownEnd {
    pub fn new(cusps: Vec<IdealPoint>, holonomy: MobiusMap) -> Result<Self, CrownError> {
        let m = cusps.len();
        let closed = holonomy == MobiusMap::identity();
        if m == 0 || (closed && m < 3) {
            return Err(CrownError::TooFewVertices(m));
        }
        let crown = CrownEnd { cusps, holonomy };
        for i in 0..m {
            if crown.cusps[i] == crown.far_end(i) {
                return Err(CrownError::Coincident(i, (i + 1) % m));
            }
        }
        Ok(crown)
    }

    pub fn polygon(p: &IdealPolygon) -> Self {
        CrownEnd { cusps: p.vertices.clone(), holonomy: MobiusMap::identity() }
    }

    pub fn m(&self) -> usize {
        self.cusps.len()
    }

    fn far_end(&self, i: usize) -> IdealPoint {
        if i + 1 < self.m() {
            self.cusps[i + 1]
        } else {
            self.holonomy.apply(self.cusps[0])
        }
    }

    /// Sides as pairs of ideal endpoints.
    pub fn sides(&self) -> Vec<(IdealPoint, IdealPoint)> {
        (0..self.m()).map(|i| (self.cusps[i], self.far_end(i))).collect()
    }

    pub fn transform(&self, g: &MobiusMap) -> CrownEnd {
        CrownEnd {
            cusps: self.cusps.iter().map(|&p| g.apply(p)).collect(),
            holonomy: g.compose(&self.holonomy).compose(&g.inverse()),
        }
    }

    /// Lengths of the sides left between the horocycles of sizes `sizes`.
    pub fn truncated_lengths(&self, sizes: &[f64]) -> Result<Vec<f64>, CrownError> {
        let m = self.m();
        if sizes.len() != m {
            return Err(CrownError::HorocycleCount { expected: m, found: sizes.len() });
        }
        if let Some(&s) = sizes.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
            return Err(CrownError::BadHorocycle(s));
        }
        let horo: Vec<Horocycle> = self.cusps.iter().zip(sizes).map(|(&base, &size)| Horocycle { base, size }).collect();
        (0..m)
            .map(|i| {
                let next = if i + 1 < m { horo[i + 1] } else { horo[0].transform(&self.holonomy) };
                let len = horocycle_gap(&horo[i], &next);
                if len > 0.0 {
                    Ok(len)
                } else {
                    Err(CrownError::Overlap(i, (i + 1) % m))
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let h = &self.holonomy;
        json!({
            "schema": "teichlab.crown/1",
            "cusps": self.cusps.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "holonomy": [[num(h.a), num(h.b)], [num(h.c), num(h.d)]],
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CrownError> {
        check_schema(v, "teichlab.crown").map_err(CrownError::Schema)?;
        let err = |m: &str| CrownError::Schema(m.to_string());
        let cusps = v["cusps"]
            .as_array()
            .ok_or_else(|| err("field `cusps`: expected an array"))?
            .iter()
            .map(IdealPoint::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        let holonomy = match v.get("holonomy") {
            None => MobiusMap::identity(),
            Some(h) => {
                let e = |i: usize, j: usize| h[i][j].as_f64().ok_or_else(|| err("field `holonomy`: expected a 2×2 matrix"));
                let (a, b, c, d) = (e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?);
                // Keep stored maps bit for bit when they are already normalized.
                if (a * d - b * c - 1.0).abs() <= 1e-12 {
                    MobiusMap { a, b, c, d }
                } else {
                    MobiusMap::new(a, b, c, d)?
                }
            }
        };
        CrownEnd::new(cusps, holonomy)
    }
}

/// Alternating sum of the truncated side lengths, up to sign; zero for an
/// odd number of cusps.
pub fn crown_residue(crown: &CrownEnd, sizes: &[f64]) -> Result<f64, CrownError> {
    let lengths = crown.truncated_lengths(sizes)?;
    if lengths.len() % 2 == 1 {
        return Ok(0.0);
    }
    Ok(crate::limits::alternating_sum(&lengths).abs())
}

/// Signed geodesic curvature at the interior samples of a curve `x + iy`,
/// positive when the curve turns left. Derivatives are three-point finite
/// differences in the chord-length parameter; with Euclidean curvature `κ`
/// and left unit normal `n`, the hyperbolic curvature is `y·κ + n_y`.
pub fn geodesic_curvature(path: &[(f64, f64)]) -> Result<Vec<f64>, CrownError> {
    let n = path.len();
    if n < 5 {
        return Err(CrownError::TooFewSamples(n));
    }
    if let Some(i) = path.iter().position(|p| !(p.1 > 0.0 && p.0.is_finite() && p.1.is_finite())) {
        return Err(CrownError::DegenerateSample(i));
    }
    let mut s = vec![0.0];
    for i in 1..n {
        let d = ((path[i].0 - path[i - 1].0).powi(2) + (path[i].1 - path[i - 1].1).powi(2)).sqrt();
        if d == 0.0 {
            return Err(CrownError::DegenerateSample(i));
        }
        s.push(s[i - 1] + d);
    }
    Ok((1..n - 1)
        .map(|i| {
            let (h0, h1) = (s[i] - s[i - 1], s[i + 1] - s[i]);
            let d1 = |f: &dyn Fn(usize) -> f64| {
                (-h1 / (h0 * (h0 + h1))) * f(i - 1) + ((h1 - h0) / (h0 * h1)) * f(i) + (h0 / (h1 * (h0 + h1))) * f(i + 1)
            };
            let d2 = |f: &dyn Fn(usize) -> f64| {
                2.0 * (f(i - 1) / (h0 * (h0 + h1)) - f(i) / (h0 * h1) + f(i + 1) / (h1 * (h0 + h1)))
            };
            let (x, y) = (|j: usize| path[j].0, |j: usize| path[j].1);
            let (x1, y1, x2, y2) = (d1(&x), d1(&y), d2(&x), d2(&y));
            let speed = (x1 * x1 + y1 * y1).sqrt();
            let kappa = (x1 * y2 - y1 * x2) / speed.powi(3);
            path[i].1 * kappa + x1 / speed
        })
        .collect())
}
