//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Radially symmetric solution for `q = zⁿ` on the disk of radius `r_max`:
/// `G'' + G'/r = 2e^G − 2r^{2n}e^{−G}`, `G'(0) = 0`, `G(r_max) = n log r_max`.
/// Second-order finite differences solved by Newton, then one Richardson
/// step between `m` and `2m` intervals.
pub struct RadialProfile {
    h: f64,
    g: Vec<f64>,
}

fn radial_fd(n: u32, r_max: f64, m: usize) -> Vec<f64> {
    let h = r_max / m as f64;
    let rhs = |g: f64, r: f64| {
        let q2 = r.powi(2 * n as i32);
        (2.0 * g.exp() - 2.0 * q2 * (-g).exp(), 2.0 * g.exp() + 2.0 * q2 * (-g).exp())
    };
    let mut g: Vec<f64> = (0..=m).map(|i| (i as f64 * h).powi(n as i32).max(1.0).ln()).collect();
    g[m] = n as f64 * r_max.ln();
    for _ in 0..100 {
        // Tridiagonal Newton system for the interior unknowns 0..m−1.
        let (mut lo, mut di, mut up, mut f) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..m {
            let r = i as f64 * h;
            let (s, ds) = rhs(g[i], r);
            if i == 0 {
                f[0] = 4.0 * (g[1] - g[0]) / (h * h) - s;
                di[0] = -4.0 / (h * h) - ds;
                up[0] = 4.0 / (h * h);
            } else {
                let (a, c) = (1.0 / (h * h) - 1.0 / (2.0 * r * h), 1.0 / (h * h) + 1.0 / (2.0 * r * h));
                f[i] = a * g[i - 1] - 2.0 * g[i] / (h * h) + c * g[i + 1] - s;
                lo[i] = a;
                di[i] = -2.0 / (h * h) - ds;
                up[i] = c;
            }
        }
        // Thomas algorithm for J δ = −f.
        let mut cp = vec![0.0; m];
        let mut dp = vec![0.0; m];
        cp[0] = up[0] / di[0];
        dp[0] = -f[0] / di[0];
        for i in 1..m {
            let den = di[i] - lo[i] * cp[i - 1];
            cp[i] = if i + 1 < m { up[i] / den } else { 0.0 };
            dp[i] = (-f[i] - lo[i] * dp[i - 1]) / den;
        }
        let mut delta = vec![0.0; m];
        delta[m - 1] = dp[m - 1];
        for i in (0..m - 1).rev() {
            delta[i] = dp[i] - cp[i] * delta[i + 1];
        }
        let worst = delta.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
        for i in 0..m {
            g[i] += delta[i];
        }
        if worst < 1e-14 {
            break;
        }
    }
    g
}

impl RadialProfile {
    pub fn solve(n: u32, r_max: f64, m: usize) -> Self {
        let coarse = radial_fd(n, r_max, m);
        let fine = radial_fd(n, r_max, 2 * m);
        let g = (0..=m).map(|i| (4.0 * fine[2 * i] - coarse[i]) / 3.0).collect();
        RadialProfile { h: r_max / m as f64, g }
    }

    /// Cubic Lagrange interpolation of `G` at radius `r`.
    pub fn g(&self, r: f64) -> f64 {
        let m = self.g.len() - 1;
        let t = r / self.h;
        let i = (t.floor() as usize).clamp(1, m - 2);
        let xs = [i - 1, i, i + 1, i + 2];
        xs.iter()
            .map(|&j| {
                let w: f64 = xs.iter().filter(|&&k| k != j).map(|&k| (t - k as f64) / (j as f64 - k as f64)).product();
                w * self.g[j]
            })
            .sum()
    }
}

/// Largest relative error of `H = e^G` at the nodes with `r_lo ≤ |z| ≤ r_hi`.
pub fn oracle_error(field: &teichlab::harmonic::BochnerField, profile: &RadialProfile, r_lo: f64, r_hi: f64) -> f64 {
    let n = field.nodes_per_side();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let r = field.node(i, j).norm();
            if r >= r_lo && r <= r_hi {
                worst = worst.max((field.log_density(i, j) - profile.g(r)).exp_m1().abs());
            }
        }
    }
    worst
}
