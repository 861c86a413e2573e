//! Collective spin in the Dicke basis `|S, m>`: coherent-spin-state
//! amplitudes, banded moment evaluation and the squeezing parameter.

use crate::error::{Error, Result};
use crate::field::PhaseBand;
use crate::special::ln_binomial_half;

/// Total spin of the symmetric ensemble, stored as `2S` so half-integer
/// spins (odd atom numbers) are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    twice_s: u32,
}

impl EnsembleSpec {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::InvalidSpec(format!("S must be positive, got {s}")));
        }
        let twice = 2.0 * s;
        if (twice - twice.round()).abs() > 1e-9 || twice > u32::MAX as f64 {
            return Err(Error::InvalidSpec(format!(
                "S must be a positive multiple of 1/2, got {s}"
            )));
        }
        Ok(Self {
            twice_s: twice.round() as u32,
        })
    }

    pub fn from_twice(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidSpec("S must be positive".into()));
        }
        Ok(Self { twice_s })
    }

    /// Ensemble of `n` two-level atoms, `S = N/2`.
    pub fn from_atoms(n: u32) -> Result<Self> {
        Self::from_twice(n)
    }

    pub fn twice_spin(&self) -> u32 {
        self.twice_s
    }

    pub fn spin(&self) -> f64 {
        0.5 * self.twice_s as f64
    }

    /// Dicke dimension `2S + 1`.
    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    /// Projection `m` of basis index `i` (`i = 0` is `m = -S`).
    #[inline]
    pub fn m(&self, i: usize) -> f64 {
        i as f64 - self.spin()
    }

    pub fn index_of(&self, m: f64) -> Result<usize> {
        let s = self.spin();
        let i = m + s;
        if !(0.0..=self.twice_s as f64).contains(&i) || (i - i.round()).abs() > 1e-9 {
            return Err(Error::Index { s, m });
        }
        Ok(i.round() as usize)
    }

    pub fn projections(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim()).map(move |i| self.m(i))
    }
}

/// Dicke amplitudes `C_m` kept as `(ln|C_m|, sign)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CssAmplitudes {
    logmag: Vec<f64>,
    sign: Vec<f64>,
}

impl CssAmplitudes {
    pub fn logmag(&self) -> &[f64] {
        &self.logmag
    }

    pub fn sign(&self) -> &[f64] {
        &self.sign
    }

    pub fn len(&self) -> usize {
        self.logmag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logmag.is_empty()
    }

    #[inline]
    pub fn amplitude(&self, i: usize) -> f64 {
        self.sign[i] * self.logmag[i].exp()
    }

    /// `C_i C_j` without forming either factor separately.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.sign[i] * self.sign[j] * (self.logmag[i] + self.logmag[j]).exp()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.amplitude(i)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.logmag.iter().map(|l| (2.0 * l).exp()).sum()
    }
}

/// Coherent spin state along +x:
/// `C_m = 2^-S sqrt((2S)! / ((S-m)! (S+m)!))`.
pub fn make_css(spec: &EnsembleSpec) -> CssAmplitudes {
    let n = spec.twice_spin() as u64;
    // mirror the lower half so the state is exactly symmetric in m
    let logmag: Vec<f64> = (0..=n)
        .map(|k| 0.5 * ln_binomial_half(n, k.min(n - k)))
        .collect();
    let sign = vec![1.0; logmag.len()];
    CssAmplitudes { logmag, sign }
}

/// `<m+1| S_+ |m> = sqrt(S(S+1) - m(m+1))`.
pub fn ladder_element(spec: &EnsembleSpec, m: f64) -> Result<f64> {
    let i = spec.index_of(m)?;
    Ok(ladder_at(spec, i))
}

/// Same as [`ladder_element`] but by basis index; written as
/// `sqrt((S-m)(S+m+1))` so the top of the ladder is an exact zero.
#[inline]
pub(crate) fn ladder_at(spec: &EnsembleSpec, i: usize) -> f64 {
    let up = (spec.twice_spin() as usize - i) as f64;
    let down = (i + 1) as f64;
    (up * down).sqrt()
}

/// First and symmetrized second moments of `(S_x, S_y, S_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mean: [f64; 3],
    /// `<S_a S_b + S_b S_a> / 2`
    pub second: [[f64; 3]; 3],
}

impl MomentSet {
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| self.second[a][b] - self.mean[a] * self.mean[b])
        })
    }

    pub fn variance(&self, axis: usize) -> f64 {
        self.second[axis][axis] - self.mean[axis] * self.mean[axis]
    }

    pub fn mean_norm(&self) -> f64 {
        norm(&self.mean)
    }

    /// `<S_x^2> + <S_y^2> + <S_z^2>`; equals `S(S+1)` on the symmetric manifold.
    pub fn casimir(&self) -> f64 {
        self.second[0][0] + self.second[1][1] + self.second[2][2]
    }
}

/// Moments of `rho_{mn} = C_m C_n exp(phi_{mn}) <phi_n|phi_m>` using only the
/// `|m - n| <= 2` band.
pub fn moments_from_band(
    spec: &EnsembleSpec,
    amps: &CssAmplitudes,
    band: &PhaseBand,
) -> Result<MomentSet> {
    let dim = spec.dim();
    if amps.len() != dim {
        return Err(Error::InvalidSpec(format!(
            "amplitude vector has {} entries for dimension {dim}",
            amps.len()
        )));
    }
    band.check_dim(dim)?;

    let mut sz = 0.0;
    let mut sz2 = 0.0;
    // <S_+ S_- + S_- S_+>
    let mut pm = 0.0;
    for i in 0..dim {
        let p = amps.pair(i, i) * band.weight(0, i).re;
        let m = spec.m(i);
        let below = if i > 0 { ladder_at(spec, i - 1) } else { 0.0 };
        let above = ladder_at(spec, i);
        sz += p * m;
        sz2 += p * m * m;
        pm += p * (below * below + above * above);
    }

    // <S_+> and <{S_z, S_+}>
    let mut sp = num_complex::Complex64::new(0.0, 0.0);
    let mut zsp = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..dim.saturating_sub(1) {
        let r = band.weight(1, i) * amps.pair(i, i + 1);
        let l = ladder_at(spec, i);
        sp += r * l;
        zsp += r * (l * (2.0 * spec.m(i) + 1.0));
    }

    // <S_+^2>
    let mut sp2 = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..dim.saturating_sub(2) {
        let r = band.weight(2, i) * amps.pair(i, i + 2);
        sp2 += r * (ladder_at(spec, i) * ladder_at(spec, i + 1));
    }

    let xx = 0.25 * (2.0 * sp2.re + pm);
    let yy = 0.25 * (-2.0 * sp2.re + pm);
    let xy = 0.5 * sp2.im;
    let xz = 0.5 * zsp.re;
    let yz = 0.5 * zsp.im;

    Ok(MomentSet {
        mean: [sp.re, sp.im, sz],
        second: [[xx, xy, xz], [xy, yy, yz], [xz, yz, sz2]],
    })
}

/// Squeezing parameter and the directions it was measured along.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeReport {
    /// `min Var(S_perp) / (S/2)`; `+inf` marks a fully decohered state.
    pub xi2: f64,
    pub mean_dir: [f64; 3],
    pub min_var_dir: [f64; 3],
    /// `|<S>| / S`
    pub contrast: f64,
    /// Minimal perpendicular variance itself.
    pub var_min: f64,
}

impl SqueezeReport {
    /// Placeholder for states whose mean spin has vanished; directions are
    /// left as zero vectors.
    pub fn decohered(contrast: f64) -> Self {
        Self {
            xi2: f64::INFINITY,
            mean_dir: [0.0; 3],
            min_var_dir: [0.0; 3],
            contrast,
            var_min: f64::NAN,
        }
    }

    pub fn is_decohered(&self) -> bool {
        self.xi2.is_infinite()
    }
}

/// Mean-spin length (in units of `S`) below which the direction is treated
/// as undefined.
pub const DEGENERATE_CONTRAST: f64 = 1e-9;

pub fn squeezing_parameter(spec: &EnsembleSpec, moments: &MomentSet) -> Result<SqueezeReport> {
    let s = spec.spin();
    let len = moments.mean_norm();
    if len < DEGENERATE_CONTRAST * s {
        return Err(Error::DegenerateDirection { norm: len });
    }
    let n0 = scale(&moments.mean, 1.0 / len);
    let (e1, e2) = perpendicular_basis(&n0);
    let cov = moments.covariance();

    let c11 = quad_form(&cov, &e1, &e1);
    let c22 = quad_form(&cov, &e2, &e2);
    let c12 = quad_form(&cov, &e1, &e2);

    let half_sum = 0.5 * (c11 + c22);
    let radius = (0.25 * (c11 - c22) * (c11 - c22) + c12 * c12).sqrt();
    let var_min = half_sum - radius;

    // major axis at theta, minor axis a quarter turn on
    let theta = 0.5 * (2.0 * c12).atan2(c11 - c22) + std::f64::consts::FRAC_PI_2;
    let (sin, cos) = theta.sin_cos();
    let min_var_dir = [
        cos * e1[0] + sin * e2[0],
        cos * e1[1] + sin * e2[1],
        cos * e1[2] + sin * e2[2],
    ];

    Ok(SqueezeReport {
        xi2: (var_min / (0.5 * s)).max(0.0),
        mean_dir: n0,
        min_var_dir,
        contrast: len / s,
        var_min,
    })
}

/// Orthonormal pair spanning the plane perpendicular to the unit vector `n`.
pub fn perpendicular_basis(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // Start from the Cartesian axis least aligned with n.
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(2);
    let mut a = [0.0; 3];
    a[k] = 1.0;
    let proj = dot(&a, n);
    let mut e1 = [a[0] - proj * n[0], a[1] - proj * n[1], a[2] - proj * n[2]];
    let l = norm(&e1);
    e1 = scale(&e1, 1.0 / l);
    let e2 = cross(n, &e1);
    (e1, e2)
}

fn quad_form(m: &[[f64; 3]; 3], u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            acc += u[a] * m[a][b] * v[b];
        }
    }
    acc
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &[f64; 3], k: f64) -> [f64; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
