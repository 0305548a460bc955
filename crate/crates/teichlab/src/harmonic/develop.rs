//! Developing coordinate curves of the pullback metric into the upper
//! half-plane.
//!
//! Along a horizontal trajectory (`q dz² > 0`) parametrized by Φ-length σ the
//! image moves at speed `2cosh(u/2)`, along a vertical one at `2|sinh(u/2)|`,
//! and in both cases it turns left at rate `−½ ∂u/∂n` per unit σ, `n` the
//! left normal in the natural coordinate. A frame `F ∈ SL₂(ℝ)` carries the
//! unit tangent at `i` pointing up to the moving tangent, and
//! `F' = F(sX + κK)` with `X = diag(½, −½)`, `K = [[0, ½], [−½, 0]]`.

use super::{BochnerField, HarmonicError};
use crate::crowned::{geodesic_curvature, IdealPoint, IdealPolygon, MobiusMap};
use crate::json::num;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trajectory {
    Horizontal,
    Vertical,
}

impl Trajectory {
    fn name(self) -> &'static str {
        match self {
            Trajectory::Horizontal => "horizontal",
            Trajectory::Vertical => "vertical",
        }
    }
}

/// A segment of a horizontal or vertical trajectory of `q dz²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinatePath {
    pub start: Complex64,
    pub kind: Trajectory,
    /// Φ-length.
    pub length: f64,
    /// The value of `√q` at the start, which fixes the direction of travel.
    pub branch: Complex64,
}

fn sqrt_near(q: Complex64, reference: Complex64) -> Complex64 {
    let s = q.sqrt();
    if (s - reference).norm() > (s + reference).norm() {
        -s
    } else {
        s
    }
}

fn direction(kind: Trajectory, w: Complex64) -> Complex64 {
    match kind {
        Trajectory::Horizontal => 1.0 / w,
        Trajectory::Vertical => Complex64::i() / w,
    }
}

impl CoordinatePath {
    /// Starts at `start` with the principal branch of `√q`.
    pub fn new(field: &BochnerField, start: Complex64, kind: Trajectory, length: f64) -> Result<Self, HarmonicError> {
        let q = field.hopf().eval(start);
        if q.norm() == 0.0 || !(length > 0.0) {
            return Err(HarmonicError::BadInput("a coordinate path needs q ≠ 0 at its start and positive length".into()));
        }
        Ok(CoordinatePath { start, kind, length, branch: q.sqrt() })
    }

    /// The segment of Φ-length `length` whose midpoint is `center`.
    pub fn centered(field: &BochnerField, center: Complex64, kind: Trajectory, length: f64) -> Result<Self, HarmonicError> {
        let mid = Self::new(field, center, kind, length)?;
        let q = field.hopf();
        let steps = 256;
        let dt = length / 2.0 / steps as f64;
        let (mut z, mut w) = (center, -mid.branch);
        for _ in 0..steps {
            let f = |z: Complex64, w: Complex64| {
                let w = sqrt_near(q.eval(z), w);
                (direction(kind, w), w)
            };
            let (k1, w1) = f(z, w);
            let (k2, w2) = f(z + 0.5 * dt * k1, w1);
            let (k3, w3) = f(z + 0.5 * dt * k2, w2);
            let (k4, w4) = f(z + dt * k3, w3);
            z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            w = sqrt_near(q.eval(z), w4);
        }
        if q.eval(z).norm() == 0.0 {
            return Err(HarmonicError::BadInput("segment runs into a zero of q".into()));
        }
        Ok(CoordinatePath { start: z, kind, length, branch: -w })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DevelopedPath {
    pub kind: Trajectory,
    /// Sample points in the domain.
    pub domain: Vec<Complex64>,
    /// Their images in the upper half-plane.
    pub image: Vec<(f64, f64)>,
    /// Image arclength from the start, per sample.
    pub arclength: Vec<f64>,
    /// Geodesic curvature of the image computed from the pullback metric.
    pub curvature: Vec<f64>,
    pub phi_length: f64,
    pub length: f64,
    /// `length − 2·phi_length` for a horizontal path, accumulated directly;
    /// equal to `length` for a vertical one.
    pub excess: f64,
    /// A vertical path along which `e = 2`: the image is a single point.
    pub collapsed: bool,
    pub end_frame: MobiusMap,
}

impl DevelopedPath {
    /// `|length − 2L|` for horizontal paths, `length` for vertical ones.
    pub fn length_error(&self) -> f64 {
        self.excess.abs()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.path/1",
            "kind": self.kind.name(),
            "phi_length": num(self.phi_length),
            "length": num(self.length),
            "length_error": num(self.length_error()),
            "collapsed": self.collapsed,
            "max_curvature": num(self.curvature.iter().fold(0.0_f64, |m, k| m.max(k.abs()))),
            "domain": self.domain.iter().map(|z| json!([num(z.re), num(z.im)])).collect::<Vec<_>>(),
            "image": self.image.iter().map(|p| json!([num(p.0), num(p.1)])).collect::<Vec<_>>(),
            "curvature": self.curvature.iter().map(|&k| num(k)).collect::<Vec<_>>(),
        })
    }
}

/// Rates of the developing equations at one point.
#[derive(Clone, Copy, Debug)]
struct Rates {
    dz: Complex64,
    branch: Complex64,
    speed: f64,
    turn: f64,
    excess: f64,
}

struct Trace {
    z: Vec<Complex64>,
    image: Vec<(f64, f64)>,
    s: Vec<f64>,
    curvature: Vec<f64>,
    excess: f64,
    frame: MobiusMap,
}

/// `F · M` with `M = sX + κK`.
fn frame_rate(f: &MobiusMap, speed: f64, turn: f64) -> [f64; 4] {
    let (m0, m1, m2, m3) = (0.5 * speed, 0.5 * turn, -0.5 * turn, -0.5 * speed);
    [f.a * m0 + f.b * m2, f.a * m1 + f.b * m3, f.c * m0 + f.d * m2, f.c * m1 + f.d * m3]
}

fn shifted(f: &MobiusMap, k: &[f64; 4], t: f64) -> MobiusMap {
    MobiusMap { a: f.a + t * k[0], b: f.b + t * k[1], c: f.c + t * k[2], d: f.d + t * k[3] }
}

/// Image length per step; longer steps are subdivided.
const MAX_IMAGE_STEP: f64 = 0.1;

/// Classical RK4 on the domain point, the frame and the accumulated length,
/// with `steps` base steps over a parameter interval of length `total`.
fn integrate(
    rates: &dyn Fn(Complex64, Complex64) -> Result<Rates, HarmonicError>,
    z0: Complex64,
    branch0: Complex64,
    frame0: MobiusMap,
    total: f64,
    steps: usize,
) -> Result<Trace, HarmonicError> {
    let (mut z, mut f) = (z0, frame0);
    let mut k = rates(z, branch0)?;
    let curv = |r: &Rates| if r.speed > 0.0 { r.turn / r.speed } else { 0.0 };
    let mut t = Trace {
        z: vec![z],
        image: vec![f.apply_interior((0.0, 1.0))],
        s: vec![0.0],
        curvature: vec![curv(&k)],
        excess: 0.0,
        frame: f,
    };
    let dt0 = total / steps as f64;
    for _ in 0..steps {
        let sub = ((k.speed * dt0 / MAX_IMAGE_STEP).ceil() as usize).max(1);
        let dt = dt0 / sub as f64;
        for _ in 0..sub {
            // RK4 for the increment `E` with `F ← F·E`, renormalized while
            // it is still close to the identity: far out the entries of `F`
            // are too large for `ad − bc` to be computed.
            let k1 = k;
            let one = MobiusMap::identity();
            let r1 = frame_rate(&one, k1.speed, k1.turn);
            let k2 = rates(z + 0.5 * dt * k1.dz, k1.branch)?;
            let r2 = frame_rate(&shifted(&one, &r1, 0.5 * dt), k2.speed, k2.turn);
            let k3 = rates(z + 0.5 * dt * k2.dz, k2.branch)?;
            let r3 = frame_rate(&shifted(&one, &r2, 0.5 * dt), k3.speed, k3.turn);
            let k4 = rates(z + dt * k3.dz, k3.branch)?;
            let r4 = frame_rate(&shifted(&one, &r3, dt), k4.speed, k4.turn);
            let avg = |a: f64, b: f64, c: f64, d: f64| dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
            z += dt / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
            let m: [f64; 4] = std::array::from_fn(|i| avg(r1[i], r2[i], r3[i], r4[i]));
            let e = shifted(&one, &m, 1.0);
            let s = (e.a * e.d - e.b * e.c).sqrt();
            f = f.compose(&MobiusMap { a: e.a / s, b: e.b / s, c: e.c / s, d: e.d / s });
            let ds = avg(k1.speed, k2.speed, k3.speed, k4.speed);
            t.excess += avg(k1.excess, k2.excess, k3.excess, k4.excess);
            k = rates(z, k4.branch)?;
            t.z.push(z);
            t.image.push(f.apply_interior((0.0, 1.0)));
            t.s.push(t.s[t.s.len() - 1] + ds);
            t.curvature.push(curv(&k));
        }
    }
    t.frame = f;
    Ok(t)
}

fn check_inside(field: &BochnerField, z: Complex64) -> Result<(), HarmonicError> {
    if z.norm() > field.trusted_radius() || !z.is_finite() {
        return Err(HarmonicError::OutsideGrid { re: z.re, im: z.im });
    }
    Ok(())
}

fn dot(g: [f64; 2], n: Complex64) -> f64 {
    g[0] * n.re + g[1] * n.im
}

/// Develops a trajectory segment starting from the frame `base`.
pub fn develop_map(field: &BochnerField, path: &CoordinatePath, base: &MobiusMap) -> Result<DevelopedPath, HarmonicError> {
    let q = field.hopf();
    let q0 = q.eval(path.start);
    if q0.norm() == 0.0 || (path.branch * path.branch - q0).norm() > 1e-9 * q0.norm() {
        return Err(HarmonicError::BadInput("branch must be a square root of q at the start".into()));
    }
    let kind = path.kind;
    let rates = |z: Complex64, reference: Complex64| -> Result<Rates, HarmonicError> {
        check_inside(field, z)?;
        let s = field.sample(z).ok_or(HarmonicError::OutsideGrid { re: z.re, im: z.im })?;
        if !s.u.is_finite() {
            return Err(HarmonicError::BadInput("path runs into a zero of q".into()));
        }
        let w = sqrt_near(s.q, reference);
        let dz = direction(kind, w);
        let normal = Complex64::i() * dz / dz.norm();
        let turn = -0.5 * dot(s.grad_u, normal) * dz.norm();
        let (speed, excess) = match kind {
            Trajectory::Horizontal => (2.0 * (0.5 * s.u).cosh(), 4.0 * (0.25 * s.u).sinh().powi(2)),
            Trajectory::Vertical => {
                let v = 2.0 * (0.5 * s.u).sinh().abs();
                (v, v)
            }
        };
        Ok(Rates { dz, branch: w, speed, turn, excess })
    };
    let base_step = field.spacing() * q0.norm().sqrt();
    let steps = ((path.length / base_step).ceil() as usize).max(64);
    let t = integrate(&rates, path.start, path.branch, *base, path.length, steps)?;
    let length = t.s[t.s.len() - 1];
    let (length, excess) = match kind {
        Trajectory::Horizontal => (2.0 * path.length + t.excess, t.excess),
        Trajectory::Vertical => (length, length),
    };
    Ok(DevelopedPath {
        kind,
        domain: t.z,
        image: t.image,
        arclength: t.s,
        curvature: t.curvature,
        phi_length: path.length,
        length,
        excess,
        collapsed: kind == Trajectory::Vertical && length <= 1e-14 * path.length,
        end_frame: t.frame,
    })
}

/// Rotation about `i` turning the upward tangent by `angle` to the left.
fn rotation(angle: f64) -> MobiusMap {
    let (s, c) = (0.5 * angle).sin_cos();
    MobiusMap { a: c, b: s, c: -s, d: c }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealVertexReport {
    /// Directions of the horizontal rays leaving the zero.
    pub angles: Vec<f64>,
    pub polygon: IdealPolygon,
    pub cross_ratios: Vec<f64>,
    /// `max − min` of the cyclic cross-ratios.
    pub spread: f64,
    /// Largest `|κ|` at the end of a developed ray: the turning left over
    /// when the ray is continued as a geodesic.
    pub tail_curvature: f64,
    pub ray_end_radius: f64,
    /// Developed images of the rays, for drawing.
    pub rays: Vec<Vec<(f64, f64)>>,
}

impl IdealVertexReport {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.ideal_vertices/1",
            "vertex_count": self.polygon.vertices.len(),
            "angles": self.angles.iter().map(|&a| num(a)).collect::<Vec<_>>(),
            "vertices": self.polygon.vertices.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "disk_angles": self.polygon.vertices.iter().map(|p| num(p.disk_angle())).collect::<Vec<_>>(),
            "cross_ratios": self.cross_ratios.iter().map(|&c| num(c)).collect::<Vec<_>>(),
            "cross_ratio_spread": num(self.spread),
            "shears": self.polygon.shears().iter().map(|&s| num(s)).collect::<Vec<_>>(),
            "tail_curvature": num(self.tail_curvature),
            "ray_end_radius": num(self.ray_end_radius),
        })
    }
}

/// For `q = a zⁿ`, develops the `n + 2` horizontal rays from the zero out to
/// the trusted radius and continues each as a geodesic to its ideal endpoint.
/// The map is conformal at the zero, so ray `k` leaves the image of the zero
/// at the same angle as in the domain.
pub fn ideal_vertices(field: &BochnerField) -> Result<IdealVertexReport, HarmonicError> {
    let (a, n) = field.hopf().as_monomial().ok_or(HarmonicError::NotMonomial)?;
    let m = n + 2;
    let r_end = field.trusted_radius();
    let steps = (r_end / field.spacing()).ceil() as usize;
    let mut angles = Vec::new();
    let mut points = Vec::new();
    let mut rays = Vec::new();
    let mut tail = 0.0_f64;
    for k in 0..m {
        let phi = (TAU * k as f64 - a.arg()) / m as f64;
        let dir = Complex64::from_polar(1.0, phi);
        let normal = Complex64::i() * dir;
        // Along these rays log|q| has no normal derivative.
        let rates = |z: Complex64, _: Complex64| -> Result<Rates, HarmonicError> {
            let s = field.sample(z).ok_or(HarmonicError::OutsideGrid { re: z.re, im: z.im })?;
            let qa = s.q.norm();
            let speed = (0.5 * s.g).exp() + qa * (-0.5 * s.g).exp();
            Ok(Rates { dz: dir, branch: dir, speed, turn: -0.5 * dot(s.grad_g, normal), excess: 0.0 })
        };
        let t = integrate(&rates, Complex64::new(0.0, 0.0), dir, rotation(phi), r_end, steps)?;
        tail = tail.max(t.curvature[t.curvature.len() - 1].abs());
        angles.push(phi);
        points.push(t.frame.apply(IdealPoint::Infinity));
        rays.push(t.image);
    }
    let polygon = IdealPolygon::new(points)?;
    // A triangle has no window of four vertices.
    let cross_ratios = if m >= 4 { polygon.cyclic_cross_ratios() } else { Vec::new() };
    let spread = match cross_ratios.is_empty() {
        true => 0.0,
        false => {
            cross_ratios.iter().fold(f64::NEG_INFINITY, |m, &c| m.max(c))
                - cross_ratios.iter().fold(f64::INFINITY, |m, &c| m.min(c))
        }
    };
    Ok(IdealVertexReport { angles, polygon, cross_ratios, spread, tail_curvature: tail, ray_end_radius: r_end, rays })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinskyRow {
    /// Φ-distance from the zero to the segment midpoint.
    pub radius: f64,
    pub center: Complex64,
    pub horizontal_length: f64,
    pub length_error: f64,
    /// Largest `|κ|` along the horizontal image, from its sample points.
    pub max_curvature: f64,
    /// The same from the pullback metric.
    pub max_curvature_metric: f64,
    pub vertical_length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinskyReport {
    pub rows: Vec<MinskyRow>,
    /// Fit `max_curvature ≈ C e^{−αR}`; `None` if some value is not positive.
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    /// The same fit for the horizontal length error and the vertical length.
    pub alpha_length: Option<f64>,
    pub alpha_vertical: Option<f64>,
    pub curvature_decreasing: bool,
    pub length_error_decreasing: bool,
    /// Set when either profile fails to decrease strictly.
    pub flagged: bool,
}

impl MinskyReport {
    pub fn to_json(&self) -> Value {
        let opt = |x: Option<f64>| x.map(num);
        json!({
            "schema": "teichlab.minsky/1",
            "alpha": opt(self.alpha),
            "c": opt(self.c),
            "alpha_positive": self.alpha.is_some_and(|a| a > 0.0),
            "alpha_length": opt(self.alpha_length),
            "alpha_vertical": opt(self.alpha_vertical),
            "curvature_decreasing": self.curvature_decreasing,
            "length_error_decreasing": self.length_error_decreasing,
            "flagged": self.flagged,
            "rows": self.rows.iter().map(|r| json!({
                "radius": num(r.radius),
                "center": [num(r.center.re), num(r.center.im)],
                "horizontal_length": num(r.horizontal_length),
                "length_error": num(r.length_error),
                "max_curvature": num(r.max_curvature),
                "max_curvature_metric": num(r.max_curvature_metric),
                "vertical_length": num(r.vertical_length),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Least-squares line through `(x, log y)`: returns `(−slope, e^{intercept})`.
fn fit_decay(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let n = xs.len() as f64;
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ls.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, l)| (x - mx) * (l - my)).sum();
    let slope = sxy / sxx;
    Some((-slope, (my - slope * mx).exp()))
}

/// Unit horizontal and vertical segments centred on the bisector of one
/// half-plane sector of `a zⁿ`, at the given Φ-distances from the zero.
pub fn minsky_check(field: &BochnerField, radii: &[f64]) -> Result<MinskyReport, HarmonicError> {
    let (a, n) = field.hopf().as_monomial().ok_or(HarmonicError::NotMonomial)?;
    let k = (n + 2) as f64;
    let bisector = (PI - a.arg()) / k;
    let mut rows = Vec::new();
    for &radius in radii {
        let rho = (k * radius / (2.0 * a.norm().sqrt())).powf(2.0 / k);
        let center = Complex64::from_polar(rho, bisector);
        check_inside(field, center)?;
        let hp = CoordinatePath::centered(field, center, Trajectory::Horizontal, 1.0)?;
        let h = develop_map(field, &hp, &MobiusMap::identity())?;
        let vp = CoordinatePath::centered(field, center, Trajectory::Vertical, 1.0)?;
        let v = develop_map(field, &vp, &MobiusMap::identity())?;
        let kappa = geodesic_curvature(&h.image)?;
        rows.push(MinskyRow {
            radius,
            center,
            horizontal_length: h.length,
            length_error: h.length_error(),
            max_curvature: kappa.iter().fold(0.0, |m: f64, k| m.max(k.abs())),
            max_curvature_metric: h.curvature.iter().fold(0.0, |m: f64, k| m.max(k.abs())),
            vertical_length: v.length,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let col = |f: fn(&MinskyRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let curv = col(|r| r.max_curvature);
    let err = col(|r| r.length_error);
    let fit = fit_decay(&xs, &curv);
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let (cd, ld) = (decreasing(&curv), decreasing(&err));
    Ok(MinskyReport {
        alpha: fit.map(|f| f.0),
        c: fit.map(|f| f.1),
        alpha_length: fit_decay(&xs, &err).map(|f| f.0),
        alpha_vertical: fit_decay(&xs, &col(|r| r.vertical_length)).map(|f| f.0),
        curvature_decreasing: cd,
        length_error_decreasing: ld,
        flagged: !(cd && ld),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crowned::hyperbolic_distance;
    use crate::harmonic::{solve_bochner, PolynomialHopf, SolverConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(q: Vec<Complex64>, r: f64, grid: usize) -> BochnerField {
        solve_bochner(&PolynomialHopf::new(q).unwrap(), r, &SolverConfig { grid, ..Default::default() }).unwrap()
    }

    #[test]
    fn flat_metric_develops_onto_a_geodesic() {
        let f = field(vec![c(1.0, 0.0)], 2.0, 32);
        let h = develop_map(&f, &CoordinatePath::new(&f, c(-0.5, 0.0), Trajectory::Horizontal, 1.0).unwrap(), &MobiusMap::identity()).unwrap();
        assert!(h.excess.abs() < 1e-30);
        assert!((h.length - 2.0).abs() < 1e-15);
        for (p, s) in h.image.iter().zip(&h.arclength) {
            assert_eq!(p.0, 0.0);
            assert!((p.1 - s.exp()).abs() < 1e-8 * p.1);
        }
        let v = develop_map(&f, &CoordinatePath::new(&f, c(0.0, -0.5), Trajectory::Vertical, 1.0).unwrap(), &MobiusMap::identity()).unwrap();
        assert!(v.collapsed);
        assert!(v.image.iter().all(|&p| hyperbolic_distance(p, (0.0, 1.0)) < 1e-14));
    }

    #[test]
    fn metric_curvature_matches_the_image_curve() {
        let f = field(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 4.0, 128);
        let path = CoordinatePath::centered(&f, c(1.0, 1.0), Trajectory::Horizontal, 1.0).unwrap();
        let d = develop_map(&f, &path, &MobiusMap::identity()).unwrap();
        let from_image = geodesic_curvature(&d.image).unwrap();
        let scale = d.curvature.iter().fold(0.0_f64, |m, k| m.max(k.abs()));
        assert!(scale > 1e-4);
        for (a, b) in from_image.iter().zip(&d.curvature[1..]) {
            assert!((a - b).abs() < 1e-3 * scale, "{a} vs {b}");
        }
        // Lengths: the accumulated excess against the arclength of the image.
        assert!((d.arclength[d.arclength.len() - 1] - d.length).abs() < 1e-9);
    }

    #[test]
    fn base_frames_give_congruent_images() {
        let f = field(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 3.0, 96);
        let path = CoordinatePath::new(&f, c(0.4, 0.9), Trajectory::Horizontal, 1.5).unwrap();
        let g = MobiusMap::new(2.0, -1.0, 0.5, 0.75).unwrap();
        let a = develop_map(&f, &path, &MobiusMap::identity()).unwrap();
        let b = develop_map(&f, &path, &g).unwrap();
        let n = a.image.len();
        for (i, j) in [(0, n - 1), (3, n / 2), (n / 3, n - 5)] {
            let da = hyperbolic_distance(a.image[i], a.image[j]);
            let db = hyperbolic_distance(b.image[i], b.image[j]);
            assert!((da - db).abs() < 1e-8, "{da} vs {db}");
        }
    }

    #[test]
    fn rays_of_z_give_a_rigid_triangle() {
        let f = field(vec![c(0.0, 0.0), c(1.0, 0.0)], 5.0, 128);
        let r = ideal_vertices(&f).unwrap();
        assert_eq!(r.polygon.vertices.len(), 3);
        assert_eq!(r.polygon.shear_count(), 0);
        assert!(r.tail_curvature < 1e-6);
        assert!(matches!(ideal_vertices(&field(vec![c(1.0, 0.0), c(1.0, 0.0)], 2.0, 32)), Err(HarmonicError::NotMonomial)));
    }

    #[test]
    fn decay_fit_recovers_an_exponential() {
        let xs = [1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * (-1.5 * x).exp()).collect();
        let (a, c) = fit_decay(&xs, &ys).unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (c - 3.0).abs() < 1e-12);
        assert!(fit_decay(&xs, &[1.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn flat_metric_has_no_decay_to_fit() {
        let f = field(vec![c(1.0, 0.0)], 4.0, 32);
        let m = minsky_check(&f, &[0.5, 1.5, 2.5]).unwrap();
        assert!(m.rows.iter().all(|r| r.length_error < 1e-30 && r.max_curvature < 1e-9 && r.vertical_length < 1e-15));
    }
}
