//! Harmonic maps from planar domains to the hyperbolic plane with a
//! polynomial Hopf differential `q dz²`.
//!
//! The unknown is `G = log H`, `H = ρ(w)|w_z|²`, solving
//! `ΔG = 2e^G − 2|q|²e^{−G}` on the square `[−R, R]²` with `G = log|q|` on
//! the boundary. The energy density is `e = H + L` with `L = |q|²/H`, and the
//! pullback metric in a natural coordinate `ζ` (`dζ² = q dz²`) is
//! `(e + 2) dx² + (e − 2) dy²` once `e` is normalized by `|q|`.
//!
//! Most diagnostics are phrased through `u = G − log|q|`, which is positive,
//! singular at the zeros and decays like `e^{−2|ζ|}` away from them.

mod develop;
mod energy;
mod hopf;

pub use develop::{
    develop_map, ideal_vertices, minsky_check, CoordinatePath, DevelopedPath, IdealVertexReport, MinskyReport,
    MinskyRow, Trajectory,
};
pub use energy::{energy, EnergyReport, Region};
pub use hopf::PolynomialHopf;

use crate::crowned::CrownError;
use crate::json::num;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error("q vanishes identically")]
    ZeroPolynomial,
    #[error("computed zero {re} + {im}i fails evaluation (|q| = {residual:e})")]
    ZeroValidation { re: f64, im: f64, residual: f64 },
    #[error("zero {re} + {im}i lies on the boundary of the domain")]
    ZeroOnBoundary { re: f64, im: f64 },
    #[error("zero {re} + {im}i lies outside the domain")]
    ZeroOutside { re: f64, im: f64 },
    #[error("no convergence after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },
    #[error("q must be a monomial a zⁿ")]
    NotMonomial,
    #[error("point {re} + {im}i is outside the trusted region")]
    OutsideGrid { re: f64, im: f64 },
    #[error("{0}")]
    BadInput(String),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Crown(#[from] CrownError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Nodes per side; forced even so that the centre of the square is not a node.
    pub grid: usize,
    /// Sup-norm of the discrete residual at which the solve stops.
    pub tol: f64,
    /// Sweep budget on the finest level.
    pub max_sweeps: usize,
    /// Over-relaxation; `None` picks `2/(1 + sin(π/N))`.
    pub omega: Option<f64>,
    /// Start from solutions on successively halved grids.
    pub nested: bool,
    /// Fraction of `R` inside which results are trusted.
    pub trusted_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { grid: 256, tol: 1e-9, max_sweeps: 100_000, omega: None, nested: true, trusted_fraction: 0.8 }
    }
}

impl SolverConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "grid": self.grid,
            "tol": num(self.tol),
            "max_sweeps": self.max_sweeps,
            "omega": self.omega.map(num),
            "nested": self.nested,
            "trusted_fraction": num(self.trusted_fraction),
        })
    }
}

/// One level of the nested solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelReport {
    pub nodes: usize,
    pub spacing: f64,
    /// Offset of the node lattice from `−R`, nonzero when a zero of `q` would
    /// otherwise land on a node.
    pub offset: f64,
    pub omega: f64,
    pub sweeps: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct BochnerField {
    q: PolynomialHopf,
    r_dom: f64,
    config: SolverConfig,
    n: usize,
    h: f64,
    origin: f64,
    g: Vec<f64>,
    /// `v = G − ½log(1 + |q|²)`, smooth everywhere and small far out.
    v: Vec<f64>,
    grad_v: Vec<[f64; 2]>,
    schedule: Vec<LevelReport>,
}

/// Node lattice `origin + i·h`, `i < n`, in both coordinates.
#[derive(Clone, Copy, Debug)]
struct Lattice {
    n: usize,
    h: f64,
    origin: f64,
}

impl Lattice {
    fn new(q: &PolynomialHopf, r: f64, n: usize) -> Self {
        let h = 2.0 * r / (n - 1) as f64;
        let hits_node = |origin: f64| {
            q.zeros().iter().any(|(z, _)| {
                let near = |x: f64| {
                    let t = (x - origin) / h;
                    (t - t.round()).abs() < 0.05
                };
                near(z.re) && near(z.im)
            })
        };
        let origin = if hits_node(-r) { -r + 0.5 * h } else { -r };
        Lattice { n, h, origin }
    }

    fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.origin + i as f64 * self.h, self.origin + j as f64 * self.h)
    }

    fn upper(&self) -> f64 {
        self.origin + (self.n - 1) as f64 * self.h
    }
}

fn smooth_part(q_abs: f64) -> f64 {
    0.5 * q_abs.mul_add(q_abs, 1.0).ln()
}

/// Keys cubic-convolution weights for the stencil `i−1..=i+2` at fraction `f`.
fn cubic_weights(f: f64) -> [f64; 4] {
    let (f2, f3) = (f * f, f * f * f);
    [
        -0.5 * f3 + f2 - 0.5 * f,
        1.5 * f3 - 2.5 * f2 + 1.0,
        -1.5 * f3 + 2.0 * f2 + 0.5 * f,
        0.5 * f3 - 0.5 * f2,
    ]
}

/// Bicubic interpolation of nodal data; `None` outside the lattice.
fn interpolate<T: Copy>(lat: &Lattice, data: &[T], z: Complex64, mut acc: impl FnMut(f64, T)) -> Option<()> {
    let (tx, ty) = ((z.re - lat.origin) / lat.h, (z.im - lat.origin) / lat.h);
    let top = (lat.n - 1) as f64;
    if !(tx >= 0.0 && ty >= 0.0 && tx <= top && ty <= top) {
        return None;
    }
    let (i, j) = ((tx.floor() as usize).min(lat.n - 2), (ty.floor() as usize).min(lat.n - 2));
    let (wx, wy) = (cubic_weights(tx - i as f64), cubic_weights(ty - j as f64));
    let clamp = |k: isize| k.clamp(0, lat.n as isize - 1) as usize;
    for (b, wyb) in wy.iter().enumerate() {
        let jj = clamp(j as isize + b as isize - 1);
        for (a, wxa) in wx.iter().enumerate() {
            let ii = clamp(i as isize + a as isize - 1);
            acc(wxa * wyb, data[jj * lat.n + ii]);
        }
    }
    Some(())
}

/// Values of the solved field at an arbitrary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub q: Complex64,
    pub g: f64,
    /// `G − log|q|`; infinite at a zero.
    pub u: f64,
    pub grad_g: [f64; 2],
    /// Gradient of `u`; meaningless at a zero.
    pub grad_u: [f64; 2],
}

impl BochnerField {
    pub fn hopf(&self) -> &PolynomialHopf {
        &self.q
    }

    pub fn r_dom(&self) -> f64 {
        self.r_dom
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn nodes_per_side(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Coordinate of node 0 along either axis.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn schedule(&self) -> &[LevelReport] {
        &self.schedule
    }

    pub fn residual(&self) -> f64 {
        self.schedule.last().map_or(0.0, |l| l.residual)
    }

    pub fn sweeps(&self) -> usize {
        self.schedule.iter().map(|l| l.sweeps).sum()
    }

    pub fn trusted_radius(&self) -> f64 {
        self.config.trusted_fraction * self.r_dom
    }

    fn lattice(&self) -> Lattice {
        Lattice { n: self.n, h: self.h, origin: self.origin }
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        self.lattice().node(i, j)
    }

    /// `G` at node `(i, j)`, row-major with `j` the row.
    pub fn log_density(&self, i: usize, j: usize) -> f64 {
        self.g[j * self.n + i]
    }

    pub fn log_densities(&self) -> &[f64] {
        &self.g
    }

    /// Bicubic interpolation of the smooth part of `G`, with the exact
    /// contribution of `q` added back.
    pub fn sample(&self, z: Complex64) -> Option<Sample> {
        let lat = self.lattice();
        let mut v = 0.0;
        interpolate(&lat, &self.v, z, |w, x| v += w * x)?;
        let mut gv = [0.0; 2];
        interpolate(&lat, &self.grad_v, z, |w, x| {
            gv[0] += w * x[0];
            gv[1] += w * x[1];
        })?;
        let (q, dq) = self.q.eval_d(z);
        let qa = q.norm();
        let g = v + smooth_part(qa);
        let u = if qa == 0.0 { f64::INFINITY } else { v + 0.5 * (1.0 / (qa * qa)).ln_1p() };
        // ∇log|q| is (Re q'/q, −Im q'/q).
        let w = 1.0 / qa.mul_add(qa, 1.0);
        let qbar_dq = q.conj() * dq;
        let grad_g = [gv[0] + w * qbar_dq.re, gv[1] - w * qbar_dq.im];
        let grad_u = if qa == 0.0 {
            [f64::NAN; 2]
        } else {
            let r = dq / q;
            [gv[0] - w * r.re, gv[1] + w * r.im]
        };
        Some(Sample { q, g, u, grad_g, grad_u })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.bochner/1",
            "hopf": self.q.to_json(),
            "r_dom": num(self.r_dom),
            "equation": "laplacian(G) = 2 exp(G) - 2 |q|^2 exp(-G), G = log|q| on the boundary of [-R, R]^2",
            "config": self.config.to_json(),
            "nodes_per_side": self.n,
            "spacing": num(self.h),
            "origin": num(self.origin),
            "trusted_radius": num(self.trusted_radius()),
            "sweeps": self.sweeps(),
            "residual": num(self.residual()),
            "min_h": num(self.g.iter().copied().fold(f64::INFINITY, f64::min).exp()),
            "schedule": self.schedule.iter().map(|l| json!({
                "nodes": l.nodes, "spacing": num(l.spacing), "offset": num(l.offset),
                "omega": num(l.omega), "sweeps": l.sweeps, "residual": num(l.residual),
            })).collect::<Vec<_>>(),
        })
    }

    /// One line per node: `x,y,G,H,L,e`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,G,H,L,e\n");
        for j in 0..self.n {
            for i in 0..self.n {
                let z = self.node(i, j);
                let g = self.g[j * self.n + i];
                let qa = self.q.eval(z).norm();
                let (h, l) = (g.exp(), qa * qa * (-g).exp());
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", z.re, z.im, g, h, l, h + l);
            }
        }
        out
    }
}

/// Per-node data for one level. The unknown is `u = G − log|q|`, which
/// vanishes on the boundary: storing `G` itself would put a rounding floor
/// of `ulp(G)·4|q|` under the residual where `|q|` is large.
struct Level {
    lat: Lattice,
    qa: Vec<f64>,
    lnq: Vec<f64>,
    /// The part of `Δ_h log|q|` kept in the equation. Far from the zeros it
    /// only approximates zero and is dropped, which removes the truncation
    /// error of the singular part; near them it is kept in full.
    lap_lnq: Vec<f64>,
}

impl Level {
    fn new(q: &PolynomialHopf, r: f64, n: usize) -> Self {
        let lat = Lattice::new(q, r, n);
        let qa: Vec<f64> = (0..n * n).map(|k| q.eval(lat.node(k % n, k / n)).norm()).collect();
        let lnq: Vec<f64> = qa.iter().map(|a| a.ln()).collect();
        let h2 = lat.h * lat.h;
        let mut lap_lnq = vec![0.0; n * n];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                let lap = (lnq[k - 1] + lnq[k + 1] + lnq[k - n] + lnq[k + n] - 4.0 * lnq[k]) / h2;
                let stencil = [k, k - 1, k + 1, k - n, k + n];
                let lo = stencil.iter().map(|&s| qa[s]).fold(f64::INFINITY, f64::min);
                // Blend out between |q| = 1/2 and |q| = 2.
                let chi = if lo < 0.25 {
                    0.0
                } else {
                    let t = ((qa[k] / 0.5).ln() / 4f64.ln()).clamp(0.0, 1.0);
                    t * t * (3.0 - 2.0 * t)
                };
                lap_lnq[k] = (1.0 - chi) * lap;
            }
        }
        Level { lat, qa, lnq, lap_lnq }
    }

    /// Residual of `Δ_h u + Δ_h log|q| = 2e^G − 2|q|²e^{−G}` at node `k` and
    /// its derivative in `u[k]`, negated.
    fn residual_at(&self, u: &[f64], k: usize) -> (f64, f64) {
        let (n, h2) = (self.lat.n, self.lat.h * self.lat.h);
        let lap = (u[k - 1] + u[k + 1] + u[k - n] + u[k + n] - 4.0 * u[k]) / h2 + self.lap_lnq[k];
        let (a, uk) = (self.qa[k], u[k]);
        // 2e^G − 2|q|²e^{−G} = 4|q| sinh u.
        let (nl, dnl) = if uk.abs() < 30.0 {
            (4.0 * a * uk.sinh(), 4.0 * a * uk.cosh())
        } else {
            let (e, l) = ((uk + self.lnq[k]).exp(), (self.lnq[k] - uk).exp() * a);
            (2.0 * (e - l), 2.0 * (e + l))
        };
        (lap - nl, 4.0 / h2 + dnl)
    }

    /// Red-black nonlinear SOR with one pointwise Newton step. Points of one
    /// colour only read the other, so each half-sweep is computed into
    /// `scratch` in parallel and copied back: the result does not depend on
    /// the thread count.
    fn half_sweep(&self, u: &mut [f64], scratch: &mut [f64], colour: usize, omega: f64) {
        let n = self.lat.n;
        {
            let u: &[f64] = u;
            scratch.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
                if j == 0 || j == n - 1 {
                    return;
                }
                let first = 1 + (j + 1 + colour) % 2;
                for i in (first..n - 1).step_by(2) {
                    let (f, d) = self.residual_at(u, j * n + i);
                    row[i] = u[j * n + i] + omega * f / d;
                }
            });
        }
        u.par_chunks_mut(n).zip(scratch.par_chunks(n)).enumerate().for_each(|(j, (ur, sr))| {
            if j == 0 || j == n - 1 {
                return;
            }
            let first = 1 + (j + 1 + colour) % 2;
            for i in (first..n - 1).step_by(2) {
                ur[i] = sr[i];
            }
        });
    }

    fn residual(&self, u: &[f64]) -> f64 {
        let n = self.lat.n;
        (1..n - 1)
            .into_par_iter()
            .map(|j| (1..n - 1).map(|i| self.residual_at(u, j * n + i).0.abs()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

const CHECK_EVERY: usize = 10;
const COARSEST: usize = 48;

fn level_sizes(n: usize, nested: bool) -> Vec<usize> {
    let mut sizes = vec![n];
    while nested {
        let c = 2 * (sizes[sizes.len() - 1] / 4);
        if c < COARSEST {
            break;
        }
        sizes.push(c);
    }
    sizes.reverse();
    sizes
}

pub fn solve_bochner(q: &PolynomialHopf, r_dom: f64, config: &SolverConfig) -> Result<BochnerField, HarmonicError> {
    if !(r_dom > 0.0 && r_dom.is_finite()) {
        return Err(HarmonicError::BadInput(format!("domain radius must be positive, got {r_dom}")));
    }
    if config.grid < 8 {
        return Err(HarmonicError::BadInput(format!("grid must have at least 8 nodes per side, got {}", config.grid)));
    }
    if !(config.tol > 0.0) || !(config.trusted_fraction > 0.0 && config.trusted_fraction < 1.0) {
        return Err(HarmonicError::BadInput("tolerance and trusted fraction must lie in (0, ∞) and (0, 1)".into()));
    }
    for (z, _) in q.zeros() {
        let m = z.re.abs().max(z.im.abs());
        if m > r_dom {
            return Err(HarmonicError::ZeroOutside { re: z.re, im: z.im });
        }
        if m == r_dom {
            return Err(HarmonicError::ZeroOnBoundary { re: z.re, im: z.im });
        }
    }
    let n = config.grid + config.grid % 2;
    let sizes = level_sizes(n, config.nested);
    let mut schedule = Vec::new();
    let mut prev: Option<(Lattice, Vec<f64>)> = None;
    let mut result = None;
    for (li, &size) in sizes.iter().enumerate() {
        let finest = li + 1 == sizes.len();
        let level = Level::new(q, r_dom, size);
        let lat = level.lat;
        let mut u: Vec<f64> = (0..size * size)
            .map(|k| {
                let (i, j) = (k % size, k / size);
                if i == 0 || j == 0 || i == size - 1 || j == size - 1 {
                    return 0.0;
                }
                let (a, lnq) = (level.qa[k], level.lnq[k]);
                match &prev {
                    Some((pl, pv)) => {
                        let z = lat.node(i, j);
                        let zc = Complex64::new(z.re.clamp(pl.origin, pl.upper()), z.im.clamp(pl.origin, pl.upper()));
                        let mut v = 0.0;
                        interpolate(pl, pv, zc, |w, x| v += w * x);
                        v + smooth_part(a) - lnq
                    }
                    None => (-lnq).max(0.0),
                }
            })
            .collect();
        let omega = config.omega.unwrap_or(2.0 / (1.0 + (std::f64::consts::PI / size as f64).sin()));
        let tol = if finest { config.tol } else { config.tol.max(1e-6) };
        let mut scratch = u.clone();
        let mut sweeps = 0;
        let mut res = level.residual(&u);
        while res >= tol {
            if sweeps >= config.max_sweeps || !res.is_finite() {
                return Err(HarmonicError::NotConverged { sweeps: schedule_sweeps(&schedule) + sweeps, residual: res });
            }
            for _ in 0..CHECK_EVERY {
                level.half_sweep(&mut u, &mut scratch, 0, omega);
                level.half_sweep(&mut u, &mut scratch, 1, omega);
            }
            sweeps += CHECK_EVERY;
            res = level.residual(&u);
        }
        schedule.push(LevelReport { nodes: size, spacing: lat.h, offset: lat.origin + r_dom, omega, sweeps, residual: res });
        let g: Vec<f64> = u.iter().zip(&level.lnq).map(|(u, l)| u + l).collect();
        let v: Vec<f64> = u.iter().zip(&level.qa).map(|(u, a)| u - 0.5 * (1.0 / (a * a)).ln_1p()).collect();
        if finest {
            result = Some((lat, g, v));
        } else {
            prev = Some((lat, v));
        }
    }
    let (lat, g, v) = result.expect("at least one level");
    let grad_v = gradient(&lat, &v);
    Ok(BochnerField {
        q: q.clone(),
        r_dom,
        config: config.clone(),
        n: lat.n,
        h: lat.h,
        origin: lat.origin,
        g,
        v,
        grad_v,
        schedule,
    })
}

fn schedule_sweeps(s: &[LevelReport]) -> usize {
    s.iter().map(|l| l.sweeps).sum()
}

/// Central differences inside, second-order one-sided differences on the edges.
fn gradient(lat: &Lattice, v: &[f64]) -> Vec<[f64; 2]> {
    let n = lat.n;
    let d = |at: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        if i == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * lat.h)
        } else if i == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * lat.h)
        } else {
            (at(i + 1) - at(i - 1)) / (2.0 * lat.h)
        }
    };
    (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            [d(&|a| v[j * n + a], i), d(&|b| v[b * n + i], j)]
        })
        .collect()
}
