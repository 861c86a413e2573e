//! Closed-form squeezing models.
//!
//! * the ideal detuned model `xi^2 = 1/Qx^2 + 2/(Qx x) + Qx^4/(24 S^2)` and
//!   its optima in the intermediate and large detuning regimes,
//! * the free-space scattering model built from the rotating-frame moments,
//!   its small-`R_x` asymptote and optima,
//! * the validity checks both models rely on.
//!
//! "Much less than" is read as a ratio of at most [`MUCH_LESS_RATIO`].

use log::warn;

use crate::error::{Error, Result};
use crate::field::{steady_field, DriveParams};

pub const MUCH_LESS_RATIO: f64 = 0.1;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealModelInput {
    pub qx: f64,
    pub x: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealValue {
    pub xi2: f64,
    /// Set when the approximation returns something no variance can be.
    pub out_of_regime: bool,
}

pub fn xi2_ideal(input: &IdealModelInput) -> Result<IdealValue> {
    let IdealModelInput { qx, x, s } = *input;
    require(x != 0.0 && !x.is_nan(), || {
        "ideal model is undefined at x = 0".into()
    })?;
    require(qx > 0.0 && qx.is_finite(), || {
        format!("Qx must be positive, got {qx}")
    })?;
    require(s >= 1.0, || format!("S must be >= 1, got {s}"))?;
    let xi2 = 1.0 / (qx * qx) + 2.0 / (qx * x) + qx.powi(4) / (24.0 * s * s);
    Ok(IdealValue {
        xi2,
        out_of_regime: !(xi2 > 0.0 && xi2.is_finite()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetuningRegime {
    /// Below `(5/2)^{5/4} 12^{-1/4} S^{-1/2}`.
    Below,
    Intermediate,
    /// Far above `12^{1/6} S^{1/3}`.
    Large,
}

/// `(lower, crossover)` detuning bounds for spin `s`.
pub fn detuning_bounds(s: f64) -> (f64, f64) {
    let lower = 2.5f64.powf(1.25) * 12f64.powf(-0.25) / s.sqrt();
    let crossover = 12f64.powf(1.0 / 6.0) * s.cbrt();
    (lower, crossover)
}

pub fn classify_detuning(x: f64, s: f64) -> DetuningRegime {
    let (lower, crossover) = detuning_bounds(s);
    let x = x.abs();
    if x < lower {
        DetuningRegime::Below
    } else if x * MUCH_LESS_RATIO >= crossover {
        DetuningRegime::Large
    } else {
        DetuningRegime::Intermediate
    }
}

/// Whether `x` sits between "well below" and "well above" the crossover.
fn in_crossover_gap(x: f64, s: f64) -> bool {
    let (_, crossover) = detuning_bounds(s);
    x > MUCH_LESS_RATIO * crossover && x * MUCH_LESS_RATIO < crossover
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumBranch {
    /// Intermediate (ideal model) or small (scattering model) detuning form.
    Intermediate,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub qx: f64,
    pub xi2: f64,
    pub branch: OptimumBranch,
    /// `x` lies in the unresolved crossover between the two regimes; the
    /// branch whose optimal `Qx` does better in the model itself was kept.
    pub boundary_warning: bool,
}

fn ideal_branch(x: f64, s: f64, branch: OptimumBranch) -> Optimum {
    let (qx, xi2) = match branch {
        OptimumBranch::Intermediate => (
            12f64.powf(0.2) * s.powf(0.4) * x.powf(-0.2),
            2.5 * 12f64.powf(-0.2) * s.powf(-0.4) * x.powf(-0.8),
        ),
        OptimumBranch::Large => (
            12f64.powf(1.0 / 6.0) * s.cbrt(),
            1.5 * 12f64.powf(-1.0 / 3.0) * s.powf(-2.0 / 3.0),
        ),
    };
    Optimum {
        qx,
        xi2,
        branch,
        boundary_warning: false,
    }
}

/// Closed-form optimum of the ideal model over `Qx`.
pub fn ideal_optimum(x: f64, s: f64) -> Result<Optimum> {
    require(x > 0.0, || format!("x must be positive, got {x}"))?;
    require(s >= 1.0, || format!("S must be >= 1, got {s}"))?;
    let (lower, _) = detuning_bounds(s);
    match classify_detuning(x, s) {
        DetuningRegime::Below => Err(Error::BelowRegime { x, bound: lower }),
        DetuningRegime::Large => Ok(ideal_branch(x, s, OptimumBranch::Large)),
        DetuningRegime::Intermediate if !in_crossover_gap(x, s) => {
            Ok(ideal_branch(x, s, OptimumBranch::Intermediate))
        }
        DetuningRegime::Intermediate => {
            let mid = ideal_branch(x, s, OptimumBranch::Intermediate);
            let large = ideal_branch(x, s, OptimumBranch::Large);
            let score = |o: &Optimum| {
                xi2_ideal(&IdealModelInput { qx: o.qx, x, s })
                    .map(|v| v.xi2)
                    .unwrap_or(f64::INFINITY)
            };
            let mut best = if score(&large) < score(&mid) {
                large
            } else {
                mid
            };
            warn!("x = {x} lies between the detuning regimes at S = {s}");
            best.boundary_warning = true;
            Ok(best)
        }
    }
}

/// Inputs of the scattering-imperfection model. `eta = inf` switches
/// scattering off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterModelInput {
    pub qx: f64,
    pub x: f64,
    pub s: f64,
    pub eta: f64,
}

impl ScatterModelInput {
    pub fn new(qx: f64, x: f64, s: f64, eta: f64) -> Result<Self> {
        require(eta > 0.0, || format!("eta must be positive, got {eta}"))?;
        require(s >= 1.0 && s.is_finite(), || {
            format!("S must be >= 1, got {s}")
        })?;
        require(x != 0.0 && x.is_finite(), || {
            format!("x must be finite and nonzero, got {x}")
        })?;
        require(qx >= 0.0 && qx.is_finite(), || {
            format!("Qx must be >= 0, got {qx}")
        })?;
        Ok(Self { qx, x, s, eta })
    }

    /// Photons scattered into free space per atom.
    pub fn rx(&self) -> f64 {
        self.qx * (1.0 + self.x * self.x) / (8.0 * self.x * self.s * self.eta)
    }

    fn curvature(&self) -> f64 {
        self.qx * self.qx * (1.0 - 2.0 * self.rx() / 3.0) / self.s
    }

    pub fn u(&self) -> f64 {
        2.0 * self.qx / (self.x * self.s) + self.curvature()
    }

    pub fn v(&self) -> f64 {
        self.qx / (2.0 * self.x * self.s) + 2.0 * self.rx() + 0.25 * self.curvature()
    }

    pub fn moments(&self) -> ScatterMoments {
        let s = self.s;
        let rx = self.rx();
        let u = self.u();
        let v = self.v();
        ScatterMoments {
            sy2: 0.5 * s * (1.0 + s * (-4.0 * rx).exp() * (-(-u).exp_m1())),
            sz2: 0.5 * s,
            w: s * (1.0 - rx) * self.qx * (-v).exp(),
        }
    }
}

/// Rotating-frame second moments: `<S~y^2>`, `<Sz^2>` and
/// `W = <S~y Sz + Sz S~y>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterMoments {
    pub sy2: f64,
    pub sz2: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormulaMode {
    /// Minimum eigenvalue of the 2x2 covariance,
    /// `(A + B - sqrt((A - B)^2 + W^2)) / S`.
    #[default]
    Standard,
    /// `(A + B - sqrt(A - B + W^2)) / S`, kept verbatim for comparison.
    AsWritten,
}

pub fn xi2_scatter(input: &ScatterModelInput, mode: FormulaMode) -> Result<f64> {
    let ScatterMoments { sy2: a, sz2: b, w } = input.moments();
    let s = input.s;
    match mode {
        FormulaMode::Standard => {
            // lambda_min = det / lambda_max avoids cancelling a ~ S^2 against
            // the square root when the anti-squeezed variance is large.
            let half_sum = 0.5 * (a + b);
            let radius = (0.25 * (a - b) * (a - b) + 0.25 * w * w).sqrt();
            let lambda_max = half_sum + radius;
            let lambda_min = if lambda_max > 0.0 {
                (a * b - 0.25 * w * w) / lambda_max
            } else {
                half_sum - radius
            };
            Ok(2.0 * lambda_min / s)
        }
        FormulaMode::AsWritten => {
            let disc = a - b + w * w;
            if disc < 0.0 {
                return Err(Error::ComplexDiscriminant { discriminant: disc });
            }
            Ok((a + b - disc.sqrt()) / s)
        }
    }
}

/// Small-`R_x` limit `1/Qx^2 + 2/(Qx x) + Qx (x^2 + 1)/(6 x S eta)`.
pub fn xi2_scatter_asymptotic(qx: f64, x: f64, s: f64, eta: f64) -> f64 {
    let rx = qx * (1.0 + x * x) / (8.0 * x * s * eta);
    if rx > MUCH_LESS_RATIO {
        warn!("R_x = {rx} is not small; asymptotic scattering model is unreliable");
    }
    1.0 / (qx * qx) + 2.0 / (qx * x) + qx * (x * x + 1.0) / (6.0 * x * s * eta)
}

fn scatter_branch(x: f64, s: f64, eta: f64, branch: OptimumBranch) -> Optimum {
    let se = s * eta;
    let (qx, xi2) = match branch {
        OptimumBranch::Intermediate => (
            (12.0 * se / (x * x + 1.0)).sqrt(),
            (4.0 * (x * x + 1.0) / (3.0 * se * x * x)).sqrt(),
        ),
        OptimumBranch::Large => (
            (12.0 * x * se / (1.0 + x * x)).cbrt(),
            3.0 * ((1.0 + x * x) / (12.0 * x * se)).powf(2.0 / 3.0),
        ),
    };
    Optimum {
        qx,
        xi2,
        branch,
        boundary_warning: false,
    }
}

/// Closed-form optimum of the asymptotic scattering model.
pub fn scatter_optimum(x: f64, s: f64, eta: f64) -> Result<Optimum> {
    require(x > 0.0 && x.is_finite(), || {
        format!("x must be positive, got {x}")
    })?;
    require(s >= 1.0, || format!("S must be >= 1, got {s}"))?;
    require(eta > 0.0, || format!("eta must be positive, got {eta}"))?;
    if s * eta < 10.0 {
        warn!("collective cooperativity S*eta = {} is not large", s * eta);
    }
    let (_, crossover) = detuning_bounds(s);
    if x * MUCH_LESS_RATIO >= crossover {
        return Ok(scatter_branch(x, s, eta, OptimumBranch::Large));
    }
    if x <= MUCH_LESS_RATIO * crossover {
        return Ok(scatter_branch(x, s, eta, OptimumBranch::Intermediate));
    }
    let small = scatter_branch(x, s, eta, OptimumBranch::Intermediate);
    let large = scatter_branch(x, s, eta, OptimumBranch::Large);
    let score = |o: &Optimum| xi2_scatter_asymptotic(o.qx, x, s, eta);
    let mut best = if score(&large) < score(&small) {
        large
    } else {
        small
    };
    warn!("x = {x} lies between the detuning regimes at S = {s}");
    best.boundary_warning = true;
    Ok(best)
}

/// One checked inequality `value <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Inequality {
    fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            value,
            bound,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    /// `(Omega/kappa) sqrt(S/2) (1 + |x|)/(1 + x^2) << 1`
    pub small_shift: Inequality,
    /// `1 << |Qx|`, checked as `1/|Qx|`
    pub q_lower: Inequality,
    /// `|Qx| << S`, checked as `|Qx|/S`
    pub q_upper: Inequality,
    pub detuning_regime: DetuningRegime,
    pub detuning_lower: f64,
    pub detuning_crossover: f64,
    /// Dispersive-regime premises; empty without physical rates.
    pub dispersive: Vec<Inequality>,
}

impl ValidityReport {
    pub fn small_shift_ok(&self) -> bool {
        self.small_shift.pass
    }

    pub fn regime_q_ok(&self) -> bool {
        self.q_lower.pass && self.q_upper.pass
    }

    pub fn inequalities(&self) -> Vec<&Inequality> {
        let mut v = vec![&self.small_shift, &self.q_lower, &self.q_upper];
        v.extend(self.dispersive.iter());
        v
    }
}

pub fn validity(params: &DriveParams, s: f64, qx: f64) -> ValidityReport {
    let x = params.x();
    let shift =
        params.omega().abs() / params.kappa() * (s / 2.0).sqrt() * (1.0 + x.abs()) / (1.0 + x * x);
    let (lower, crossover) = detuning_bounds(s);

    let mut dispersive = Vec::new();
    if let Some(r) = params.rates() {
        let big_delta = r.excited_detuning();
        dispersive.push(Inequality::at_most(
            "kappa_over_Delta",
            params.kappa() / big_delta,
            MUCH_LESS_RATIO,
        ));
        dispersive.push(Inequality::at_most(
            "Gamma_over_Delta",
            r.gamma / big_delta,
            MUCH_LESS_RATIO,
        ));
        dispersive.push(Inequality::at_most(
            "g_over_Delta",
            r.g.abs() / big_delta,
            MUCH_LESS_RATIO,
        ));
        let twice = (2.0 * s).round() as i64;
        let photons = (0..=twice)
            .map(|k| steady_field(params, k as f64 - s).norm_sqr())
            .fold(0.0, f64::max);
        let ceiling = (big_delta / r.g).powi(2);
        dispersive.push(Inequality::at_most(
            "photons_over_ceiling",
            photons / ceiling,
            MUCH_LESS_RATIO,
        ));
    }

    ValidityReport {
        small_shift: Inequality::at_most("small_shift", shift, MUCH_LESS_RATIO),
        q_lower: Inequality::at_most("qx_lower", 1.0 / qx.abs(), MUCH_LESS_RATIO),
        q_upper: Inequality::at_most("qx_upper", qx.abs() / s, MUCH_LESS_RATIO),
        detuning_regime: classify_detuning(x, s),
        detuning_lower: lower,
        detuning_crossover: crossover,
        dispersive,
    }
}
