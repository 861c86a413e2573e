//! Intracavity field of each `S_z` branch and the phase factors left on the
//! spin after the output continuum is traced out.
//!
//! Units: rates are angular frequencies in rad/us, times in us. The drive is
//! the constant `beta_in = i sqrt(kappa) beta0` with real `beta0 >= 0`, so the
//! branch field is
//!
//! ```text
//! phi_m(t) = kappa beta0 (1 - exp(-a_m t)) / a_m,   a_m = kappa/2 + i(delta + Omega m)
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::spin::EnsembleSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Microscopic rates behind the dispersive model. `Delta = omega_a / 2` is
/// the (equal and opposite) detuning of both optical transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalRates {
    pub g: f64,
    pub gamma: f64,
    pub omega_a: f64,
    pub omega_c: f64,
    pub omega_l: f64,
}

impl PhysicalRates {
    /// `|Delta|`
    pub fn excited_detuning(&self) -> f64 {
        0.5 * self.omega_a.abs()
    }

    /// Dispersive shift `Omega = 2 g^2 / |Delta|`.
    pub fn dispersive_shift(&self) -> f64 {
        2.0 * self.g * self.g / self.excited_detuning()
    }

    /// Single-atom cooperativity `eta = 4 g^2 / (kappa Gamma)`.
    pub fn cooperativity(&self, kappa: f64) -> f64 {
        4.0 * self.g * self.g / (kappa * self.gamma)
    }

    /// Laser-cavity detuning `omega_c - omega_l`.
    pub fn cavity_detuning(&self) -> f64 {
        self.omega_c - self.omega_l
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    kappa: f64,
    delta: f64,
    omega: f64,
    beta0: f64,
    rates: Option<PhysicalRates>,
}

/// Reconcile the two ways of giving the detuning, `delta = -x kappa / 2`.
pub fn resolve_detuning(kappa: f64, x: Option<f64>, delta: Option<f64>) -> Result<f64> {
    match (x, delta) {
        (Some(x), None) => Ok(-x * kappa / 2.0),
        (None, Some(d)) => Ok(d),
        (Some(x), Some(d)) => {
            let from_x = -x * kappa / 2.0;
            if (from_x - d).abs() <= 1e-12 * d.abs().max(1.0) {
                Ok(d)
            } else {
                Err(Error::InvalidArgument(format!(
                    "x = {x} implies delta = {from_x}, but delta = {d} was given"
                )))
            }
        }
        (None, None) => Err(Error::InvalidArgument(
            "one of x or delta is required".into(),
        )),
    }
}

impl DriveParams {
    pub fn new(kappa: f64, delta: f64, omega: f64, beta0: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Domain(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !delta.is_finite() || !omega.is_finite() {
            return Err(Error::Domain("delta and Omega must be finite".into()));
        }
        if !(beta0.is_finite() && beta0 >= 0.0) {
            return Err(Error::Domain(format!(
                "beta0 must be real and >= 0, got {beta0}"
            )));
        }
        Ok(Self {
            kappa,
            delta,
            omega,
            beta0,
            rates: None,
        })
    }

    /// Parameters with the detuning in half-linewidths, `delta = -x kappa / 2`.
    pub fn with_x(kappa: f64, x: f64, omega: f64, beta0: f64) -> Result<Self> {
        Self::new(kappa, -x * kappa / 2.0, omega, beta0)
    }

    /// Attach the microscopic rates; `Omega` must equal `2 g^2/|Delta|`.
    pub fn with_rates(mut self, rates: PhysicalRates) -> Result<Self> {
        let shift = rates.dispersive_shift();
        if (shift - self.omega).abs() > 1e-9 * self.omega.abs().max(shift.abs()) {
            return Err(Error::InvalidArgument(format!(
                "Omega = {} but 2g^2/|Delta| = {shift}",
                self.omega
            )));
        }
        let eta = rates.cooperativity(self.kappa);
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cooperativity must be positive, got {eta}"
            )));
        }
        self.rates = Some(rates);
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn rates(&self) -> Option<&PhysicalRates> {
        self.rates.as_ref()
    }

    /// Normalized detuning `x = -2 delta / kappa`.
    pub fn x(&self) -> f64 {
        -2.0 * self.delta / self.kappa
    }

    pub fn eta(&self) -> Option<f64> {
        self.rates.map(|r| r.cooperativity(self.kappa))
    }

    /// `a_m = kappa/2 + i (delta + Omega m)`
    #[inline]
    pub fn pole(&self, m: f64) -> Complex64 {
        Complex64::new(0.5 * self.kappa, self.delta + self.omega * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldMode {
    Transient { t: f64 },
    Steady,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchField {
    pub m: f64,
    pub value: Complex64,
    pub mode: FieldMode,
}

impl BranchField {
    pub fn new(params: &DriveParams, m: f64, mode: FieldMode) -> Result<Self> {
        let value = match mode {
            FieldMode::Transient { t } => transient_field(params, m, t)?,
            FieldMode::Steady => steady_field(params, m),
        };
        Ok(Self { m, value, mode })
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
fn expm1_c(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// `int_0^t exp(-c s) ds = (1 - exp(-c t)) / c`.
fn decay_integral(c: Complex64, t: f64) -> Complex64 {
    -expm1_c(-c * t) / c
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// Intracavity amplitude of branch `m` after driving for `t`, starting empty.
pub fn transient_field(params: &DriveParams, m: f64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    if t.is_infinite() {
        return Ok(steady_field(params, m));
    }
    Ok(decay_integral(params.pole(m), t) * (params.kappa * params.beta0))
}

/// Long-time amplitude `kappa beta0 / (kappa/2 + i(delta + Omega m))`.
pub fn steady_field(params: &DriveParams, m: f64) -> Complex64 {
    Complex64::new(params.kappa * params.beta0, 0.0) / params.pole(m)
}

/// Coherent-state overlap `<alpha_n | alpha_m>`.
pub fn coherent_overlap(alpha_m: Complex64, alpha_n: Complex64) -> Complex64 {
    let d = alpha_m - alpha_n;
    Complex64::new(-0.5 * d.norm_sqr(), (alpha_n.conj() * alpha_m).im).exp()
}

/// One `(m, n)` element of the band: the traced continuum phase and the
/// intracavity overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEntry {
    pub phi: Complex64,
    pub overlap: Complex64,
}

impl BandEntry {
    pub fn identity() -> Self {
        Self {
            phi: Complex64::new(0.0, 0.0),
            overlap: Complex64::new(1.0, 0.0),
        }
    }

    /// `exp(phi) * overlap`, the factor multiplying `C_m C_n`.
    #[inline]
    pub fn weight(&self) -> Complex64 {
        self.phi.exp() * self.overlap
    }

    pub fn conj(&self) -> Self {
        Self {
            phi: self.phi.conj(),
            overlap: self.overlap.conj(),
        }
    }
}

/// How the traced-out phase is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// Steady-state closed form, linear in `t`.
    #[default]
    Analytic,
    /// Full transient integrals from `0` to `t`.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapMode {
    #[default]
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericMethod {
    ClosedForm,
    Quadrature(QuadOptions),
}

/// Phase `phi_{m,n}(t)` from the three time integrals of the transient
/// fields, plus the cavity overlap at `t`. Uses exact antiderivatives.
pub fn phase_numeric(params: &DriveParams, m: f64, n: f64, t: f64) -> Result<BandEntry> {
    phase_numeric_with(params, m, n, t, NumericMethod::ClosedForm)
}

pub fn phase_numeric_with(
    params: &DriveParams,
    m: f64,
    n: f64,
    t: f64,
    method: NumericMethod,
) -> Result<BandEntry> {
    check_time(t)?;
    if m == n || t == 0.0 {
        return Ok(BandEntry::identity());
    }
    let phi = match method {
        NumericMethod::ClosedForm => phase_closed_form(params, m, n, t),
        NumericMethod::Quadrature(opts) => phase_quadrature(params, m, n, t, &opts)?,
    };
    let overlap = coherent_overlap(
        transient_field(params, m, t)?,
        transient_field(params, n, t)?,
    );
    Ok(BandEntry { phi, overlap })
}

fn phase_closed_form(p: &DriveParams, m: f64, n: f64, t: f64) -> Complex64 {
    let kappa = p.kappa;
    let drive = kappa * p.beta0;
    let (am, an) = (p.pole(m), p.pole(n));
    let big_m = drive / am;
    let big_n = drive / an;

    // Steady-state growth, grouped so the large |A|^2 terms cancel exactly.
    let diff = big_m - big_n;
    let cross = big_n.conj() * big_m;
    let slope = Complex64::new(
        -0.5 * kappa * diff.norm_sqr(),
        -drive * (big_m.im - big_n.im) + kappa * cross.im,
    );

    // Transient remainder, bounded in t.
    let em = decay_integral(am, t);
    let en = decay_integral(an, t);
    let ek = decay_integral(Complex64::new(kappa, 0.0), t).re;
    let ex = decay_integral(am + an.conj(), t);
    let drive_part = -I * drive * (-(big_m * em).im + (big_n * en).im);
    let self_m = -0.5 * kappa * big_m.norm_sqr() * (ek - 2.0 * em.re);
    let self_n = -0.5 * kappa * big_n.norm_sqr() * (ek - 2.0 * en.re);
    let mixed = cross * kappa * (ex - en.conj() - em);

    slope * t + drive_part + self_m + self_n + mixed
}

fn phase_quadrature(
    p: &DriveParams,
    m: f64,
    n: f64,
    t: f64,
    opts: &QuadOptions,
) -> Result<Complex64> {
    let kappa = p.kappa;
    let drive = kappa * p.beta0;
    let (am, an) = (p.pole(m), p.pole(n));
    let integrand = |s: f64| {
        let fm = decay_integral(am, s) * drive;
        let fn_ = decay_integral(an, s) * drive;
        -I * drive * (fm.im - fn_.im) - 0.5 * kappa * (fm.norm_sqr() + fn_.norm_sqr())
            + fn_.conj() * fm * kappa
    };
    Ok(quad::integrate(integrand, 0.0, t, opts)?.value)
}

/// Long-time phase
///
/// ```text
/// phi_{m,n} = i |phi_m|^2 |phi_n|^2 Omega^2 t / (kappa beta0^2) * {
///     (kappa^2/4 + delta^2)/(Omega kappa) (n - m) + (delta/kappa)(n^2 - m^2)
///   + (Omega/kappa) n m (n - m) + i (n - m)^2 / 2 }
/// ```
///
/// evaluated with the `Omega` and `beta0` factors folded in, so it stays
/// finite at `Omega = 0` and `beta0 = 0`.
pub fn phase_analytic(params: &DriveParams, m: f64, n: f64, t: f64) -> Complex64 {
    if m == n {
        return Complex64::new(0.0, 0.0);
    }
    let DriveParams {
        kappa,
        delta,
        omega,
        beta0,
        ..
    } = *params;
    let k3 = kappa * kappa * kappa;
    let pref = k3 * beta0 * beta0 * t / (params.pole(m).norm_sqr() * params.pole(n).norm_sqr());
    let d = n - m;
    let brace_re = omega * (0.25 * kappa * kappa + delta * delta) / kappa * d
        + omega * omega * delta / kappa * (n * n - m * m)
        + omega * omega * omega / kappa * n * m * d;
    let brace_im = 0.5 * omega * omega * d * d;
    I * pref * Complex64::new(brace_re, brace_im)
}

/// Overlap of the steady branch fields.
pub fn steady_overlap(params: &DriveParams, m: f64, n: f64) -> Complex64 {
    coherent_overlap(steady_field(params, m), steady_field(params, n))
}

/// Band entry for one `(m, n)` pair in the requested modes.
pub fn band_entry(
    params: &DriveParams,
    m: f64,
    n: f64,
    t: f64,
    phase: PhaseMode,
    overlap: OverlapMode,
) -> Result<BandEntry> {
    check_time(t)?;
    let mut entry = match phase {
        PhaseMode::Numeric => phase_numeric(params, m, n, t)?,
        PhaseMode::Analytic => BandEntry {
            phi: phase_analytic(params, m, n, t),
            overlap: if t == 0.0 || m == n {
                Complex64::new(1.0, 0.0)
            } else {
                steady_overlap(params, m, n)
            },
        },
    };
    if overlap == OverlapMode::Off {
        entry.overlap = Complex64::new(1.0, 0.0);
    }
    Ok(entry)
}

/// Phase factors on the `|m - n| <= 2` band, stored as the upper offsets
/// `0, 1, 2`; lower offsets follow from Hermitian symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBand {
    offsets: Vec<Vec<BandEntry>>,
}

pub const BAND_WIDTH: usize = 2;

impl PhaseBand {
    /// `offsets[d][i]` is the entry for `(m_i, m_{i+d})`.
    pub fn from_offsets(offsets: Vec<Vec<BandEntry>>) -> Self {
        Self { offsets }
    }

    /// All phases zero, all overlaps one: the undriven state.
    pub fn identity(dim: usize) -> Self {
        let offsets = (0..=BAND_WIDTH)
            .map(|d| vec![BandEntry::identity(); dim.saturating_sub(d)])
            .collect();
        Self { offsets }
    }

    pub fn build(
        spec: &EnsembleSpec,
        params: &DriveParams,
        t: f64,
        phase: PhaseMode,
        overlap: OverlapMode,
    ) -> Result<Self> {
        let dim = spec.dim();
        let offsets = (0..=BAND_WIDTH)
            .map(|d| {
                (0..dim.saturating_sub(d))
                    .map(|i| band_entry(params, spec.m(i), spec.m(i + d), t, phase, overlap))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { offsets })
    }

    pub fn offsets(&self) -> &[Vec<BandEntry>] {
        &self.offsets
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        for d in 0..=BAND_WIDTH {
            let expected = dim.saturating_sub(d);
            let found = self.offsets.get(d).map_or(0, Vec::len);
            if found != expected {
                return Err(Error::IncompleteBand {
                    offset: d,
                    found,
                    expected,
                });
            }
        }
        Ok(())
    }

    /// Entry for basis indices `(i, j)`, or `None` outside the band.
    pub fn get(&self, i: usize, j: usize) -> Option<BandEntry> {
        if j >= i {
            self.offsets.get(j - i)?.get(i).copied()
        } else {
            self.offsets.get(i - j)?.get(j).map(BandEntry::conj)
        }
    }

    #[inline]
    pub(crate) fn weight(&self, offset: usize, i: usize) -> Complex64 {
        self.offsets[offset][i].weight()
    }
}
