//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's band, moment or phase code.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2, Vector3};
use num_complex::Complex64;

pub type C = Complex64;
pub const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct Drive {
    pub kappa: f64,
    pub delta: f64,
    pub omega: f64,
    pub beta0: f64,
}

impl Drive {
    pub fn from_x(kappa: f64, x: f64, omega: f64, beta0: f64) -> Self {
        Self {
            kappa,
            delta: -x * kappa / 2.0,
            omega,
            beta0,
        }
    }

    pub fn rate(&self, m: f64) -> C {
        C::new(self.kappa / 2.0, self.delta + self.omega * m)
    }

    pub fn steady(&self, m: f64) -> C {
        C::new(self.kappa * self.beta0, 0.0) / self.rate(m)
    }
}

pub fn projections(s: f64) -> Vec<f64> {
    let n = (2.0 * s).round() as usize;
    (0..=n).map(|i| i as f64 - s).collect()
}

/// Binomial coherent-state amplitudes by direct products (small `S`).
pub fn css_amplitudes(s: f64) -> Vec<f64> {
    let n = (2.0 * s).round() as usize;
    let mut p = vec![0.0; n + 1];
    let mut c = 0.5f64.powi(n as i32);
    for (k, slot) in p.iter_mut().enumerate() {
        *slot = c;
        c *= (n - k) as f64 / (k + 1) as f64;
    }
    p.into_iter().map(f64::sqrt).collect()
}

/// `(S_x, S_y, S_z)` in the `|S, m>` basis ordered by increasing `m`.
pub fn spin_matrices(s: f64) -> [DMatrix<C>; 3] {
    let ms = projections(s);
    let d = ms.len();
    let mut plus = DMatrix::<C>::zeros(d, d);
    for i in 0..d - 1 {
        let m = ms[i];
        plus[(i + 1, i)] = C::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let sx = (&plus + &minus) * C::new(0.5, 0.0);
    let sy = (&plus - &minus) * C::new(0.0, -0.5);
    let sz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        ms.iter().map(|m| C::new(*m, 0.0)),
    ));
    [sx, sy, sz]
}

/// `rho_ij = c_i c_j w(i, j)`; `w` is consulted for `i <= j` only and the
/// rest filled by Hermitian symmetry.
pub fn dense_rho(c: &[f64], w: impl Fn(usize, usize) -> C) -> DMatrix<C> {
    let d = c.len();
    let mut rho = DMatrix::<C>::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = w(i, j) * (c[i] * c[j]);
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    rho
}

#[derive(Debug, Clone, Copy)]
pub struct DenseMoments {
    pub mean: [f64; 3],
    pub second: [[f64; 3]; 3],
}

pub fn dense_moments(rho: &DMatrix<C>, s: f64) -> DenseMoments {
    let ops = spin_matrices(s);
    let tr = |m: &DMatrix<C>| (rho * m).trace();
    let mut mean = [0.0; 3];
    let mut second = [[0.0; 3]; 3];
    for a in 0..3 {
        mean[a] = tr(&ops[a]).re;
        for b in 0..3 {
            let anti = &ops[a] * &ops[b] + &ops[b] * &ops[a];
            second[a][b] = 0.5 * tr(&anti).re;
        }
    }
    DenseMoments { mean, second }
}

/// Minimal variance perpendicular to the mean spin over `S/2`, via a
/// symmetric eigen-decomposition of the 2x2 covariance.
pub fn xi2_eigen(m: &DenseMoments, s: f64) -> f64 {
    let (e1, e2) = perpendicular_pair(m);
    let cov = covariance(m);
    let q = |u: &Vector3<f64>, v: &Vector3<f64>| (u.transpose() * cov * v)[(0, 0)];
    let mat = Matrix2::new(q(&e1, &e1), q(&e1, &e2), q(&e2, &e1), q(&e2, &e2));
    let eig = mat.symmetric_eigen();
    eig.eigenvalues.min() / (s / 2.0)
}

/// Same quantity from a dense angle scan plus local refinement.
pub fn xi2_angle_scan(m: &DenseMoments, s: f64) -> f64 {
    let (e1, e2) = perpendicular_pair(m);
    let cov = covariance(m);
    let var = |th: f64| {
        let u = e1 * th.cos() + e2 * th.sin();
        (u.transpose() * cov * u)[(0, 0)]
    };
    let n = 20_000;
    let step = std::f64::consts::PI / n as f64;
    let (mut best, mut th0) = (f64::INFINITY, 0.0);
    for k in 0..n {
        let th = k as f64 * step;
        let v = var(th);
        if v < best {
            best = v;
            th0 = th;
        }
    }
    let (mut a, mut b) = (th0 - step, th0 + step);
    for _ in 0..200 {
        let c = a + (b - a) / 3.0;
        let d = b - (b - a) / 3.0;
        if var(c) < var(d) {
            b = d;
        } else {
            a = c;
        }
    }
    var(0.5 * (a + b)) / (s / 2.0)
}

fn covariance(m: &DenseMoments) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::from_fn(|a, b| m.second[a][b] - m.mean[a] * m.mean[b])
}

fn perpendicular_pair(m: &DenseMoments) -> (Vector3<f64>, Vector3<f64>) {
    let n = Vector3::from(m.mean).normalize();
    let trial = if n.z.abs() < 0.9 {
        Vector3::z()
    } else {
        Vector3::x()
    };
    let e1 = (trial - n * n.dot(&trial)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Brute-force RK4 integration of every branch field and every pairwise
/// phase from an empty cavity. Returns `(alpha, phi)` with `phi[i][j]`
/// filled for `i < j`.
pub fn integrate_phases(d: &Drive, s: f64, t: f64, steps: usize) -> (Vec<C>, Vec<Vec<C>>) {
    let ms = projections(s);
    let n = ms.len();
    let drive = d.kappa * d.beta0;
    let rates: Vec<C> = ms.iter().map(|m| d.rate(*m)).collect();

    let deriv = |alpha: &[C]| -> (Vec<C>, Vec<Vec<C>>) {
        let da: Vec<C> = (0..n)
            .map(|i| C::new(drive, 0.0) - rates[i] * alpha[i])
            .collect();
        let mut dp = vec![vec![C::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let (am, an) = (alpha[i], alpha[j]);
                dp[i][j] = -I * drive * (am.im - an.im)
                    - 0.5 * d.kappa * (am.norm_sqr() + an.norm_sqr())
                    + an.conj() * am * d.kappa;
            }
        }
        (da, dp)
    };

    let h = t / steps as f64;
    let mut alpha = vec![C::new(0.0, 0.0); n];
    let mut phi = vec![vec![C::new(0.0, 0.0); n]; n];
    let shift =
        |a: &[C], k: &[C], f: f64| -> Vec<C> { a.iter().zip(k).map(|(x, y)| x + y * f).collect() };
    for _ in 0..steps {
        let (k1a, k1p) = deriv(&alpha);
        let (k2a, k2p) = deriv(&shift(&alpha, &k1a, h / 2.0));
        let (k3a, k3p) = deriv(&shift(&alpha, &k2a, h / 2.0));
        let (k4a, k4p) = deriv(&shift(&alpha, &k3a, h));
        for i in 0..n {
            alpha[i] += (k1a[i] + k2a[i] * 2.0 + k3a[i] * 2.0 + k4a[i]) * (h / 6.0);
            for j in i + 1..n {
                phi[i][j] +=
                    (k1p[i][j] + k2p[i][j] * 2.0 + k3p[i][j] * 2.0 + k4p[i][j]) * (h / 6.0);
            }
        }
    }
    (alpha, phi)
}

/// RK4 step count giving `h * max|rate| <= 1e-3`.
pub fn rk4_steps(d: &Drive, s: f64, t: f64) -> usize {
    let fastest = projections(s)
        .iter()
        .map(|m| d.rate(*m).norm())
        .fold(d.kappa, f64::max);
    ((t * fastest / 1e-3).ceil() as usize).max(16)
}

pub fn overlap(am: C, an: C) -> C {
    // <alpha_n|alpha_m> = exp(-|am|^2/2 - |an|^2/2 + an* am)
    (-0.5 * am.norm_sqr() - 0.5 * an.norm_sqr() + an.conj() * am).exp()
}

/// Long-time growth rate of the phase, from the steady fields.
pub fn steady_slope(d: &Drive, m: f64, n: f64) -> C {
    let (am, an) = (d.steady(m), d.steady(n));
    let drive = d.kappa * d.beta0;
    -I * drive * (am.im - an.im) - 0.5 * d.kappa * (am.norm_sqr() + an.norm_sqr())
        + an.conj() * am * d.kappa
}

/// Dense state with the transient phases and fields from RK4.
pub fn brute_force_state(d: &Drive, s: f64, t: f64) -> DMatrix<C> {
    let c = css_amplitudes(s);
    let (alpha, phi) = integrate_phases(d, s, t, rk4_steps(d, s, t));
    dense_rho(&c, |i, j| {
        if i == j {
            C::new(1.0, 0.0)
        } else {
            phi[i][j].exp() * overlap(alpha[i], alpha[j])
        }
    })
}

/// Dense state in the steady-phase approximation.
pub fn steady_state(d: &Drive, s: f64, t: f64) -> DMatrix<C> {
    let c = css_amplitudes(s);
    let ms = projections(s);
    dense_rho(&c, |i, j| {
        if i == j {
            return C::new(1.0, 0.0);
        }
        let w = (steady_slope(d, ms[i], ms[j]) * t).exp();
        if t == 0.0 {
            w
        } else {
            w * overlap(d.steady(ms[i]), d.steady(ms[j]))
        }
    })
}

pub fn max_moment_diff(a: &DenseMoments, b: &cavsq::MomentSet) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        worst = worst.max((a.mean[k] - b.mean[k]).abs());
        for l in 0..3 {
            worst = worst.max((a.second[k][l] - b.second[k][l]).abs());
        }
    }
    worst
}
