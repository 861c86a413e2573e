//! Reduced spin state under continuous drive and the squeezing trajectory.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{DriveParams, OverlapMode, PhaseBand, PhaseMode};
use crate::optimize::golden_section;
use crate::spin::{
    make_css, moments_from_band, squeezing_parameter, EnsembleSpec, MomentSet, SqueezeReport,
};

/// Dimensionless interaction strength reached after driving for `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearingPoint {
    /// `4 S beta0^2 Omega^2 t / kappa`
    pub q: f64,
    /// `4 Q x / (1 + x^2)^2`
    pub qx: f64,
    pub t: f64,
}

fn detuning_factor(x: f64) -> f64 {
    let d = 1.0 + x * x;
    4.0 * x / (d * d)
}

/// `dQ/dt`
fn shear_rate(params: &DriveParams, spec: &EnsembleSpec) -> f64 {
    4.0 * spec.spin() * params.beta0() * params.beta0() * params.omega() * params.omega()
        / params.kappa()
}

pub fn shearing_strength(
    params: &DriveParams,
    spec: &EnsembleSpec,
    t: f64,
) -> Result<ShearingPoint> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let q = shear_rate(params, spec) * t;
    Ok(ShearingPoint {
        q,
        qx: detuning_factor(params.x()) * q,
        t,
    })
}

/// Drive duration that produces shearing strength `q`.
pub fn t_from_q(params: &DriveParams, spec: &EnsembleSpec, q: f64) -> Result<f64> {
    if q == 0.0 {
        return Ok(0.0);
    }
    let rate = shear_rate(params, spec);
    if rate == 0.0 || !rate.is_finite() {
        return Err(Error::NoFiniteTime { q });
    }
    let t = q / rate;
    if t < 0.0 {
        return Err(Error::Domain(format!("Q = {q} needs negative time")));
    }
    Ok(t)
}

/// Drive duration that produces detuned shearing strength `qx`.
pub fn t_from_qx(params: &DriveParams, spec: &EnsembleSpec, qx: f64) -> Result<f64> {
    if qx == 0.0 {
        return Ok(0.0);
    }
    let f = detuning_factor(params.x());
    if f == 0.0 {
        return Err(Error::NoFiniteTime { q: qx });
    }
    t_from_q(params, spec, qx / f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvolveOptions {
    pub phase: PhaseMode,
    pub overlap: OverlapMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evolved {
    pub moments: MomentSet,
    pub report: SqueezeReport,
}

/// Spin moments and squeezing after driving the x-polarized coherent state
/// for `t`.
pub fn evolve(
    spec: &EnsembleSpec,
    params: &DriveParams,
    t: f64,
    opts: EvolveOptions,
) -> Result<Evolved> {
    let amps = make_css(spec);
    evolve_from(spec, &amps, params, t, opts)
}

fn evolve_from(
    spec: &EnsembleSpec,
    amps: &crate::spin::CssAmplitudes,
    params: &DriveParams,
    t: f64,
    opts: EvolveOptions,
) -> Result<Evolved> {
    let band = PhaseBand::build(spec, params, t, opts.phase, opts.overlap)?;
    let moments = moments_from_band(spec, amps, &band)?;
    let report = squeezing_parameter(spec, &moments)?;
    Ok(Evolved { moments, report })
}

/// Like [`evolve`] but a vanished mean spin yields the `xi2 = inf` sentinel
/// instead of an error.
fn evolve_lenient(
    spec: &EnsembleSpec,
    amps: &crate::spin::CssAmplitudes,
    params: &DriveParams,
    t: f64,
    opts: EvolveOptions,
) -> Result<Evolved> {
    let band = PhaseBand::build(spec, params, t, opts.phase, opts.overlap)?;
    let moments = moments_from_band(spec, amps, &band)?;
    let report = match squeezing_parameter(spec, &moments) {
        Ok(r) => r,
        Err(Error::DegenerateDirection { norm }) => SqueezeReport::decohered(norm / spec.spin()),
        Err(e) => return Err(e),
    };
    Ok(Evolved { moments, report })
}

/// `xi^2` after driving for `t`; `+inf` once the mean spin has vanished.
pub fn xi2_at(
    spec: &EnsembleSpec,
    params: &DriveParams,
    t: f64,
    opts: EvolveOptions,
) -> Result<f64> {
    let amps = make_css(spec);
    Ok(evolve_lenient(spec, &amps, params, t, opts)?.report.xi2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub shear: ShearingPoint,
    pub report: SqueezeReport,
    pub moments: MomentSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub points: Vec<TrajectoryPoint>,
    /// Smallest `xi^2`, refined between grid points; may lie off the grid.
    pub minimum: TrajectoryPoint,
}

/// Relative width in `t` at which the golden-section refinement stops.
pub const REFINE_REL_TOL: f64 = 1e-4;

pub fn sweep_trajectory(
    spec: &EnsembleSpec,
    params: &DriveParams,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<TrajectoryResult> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument(
            "time grid must be finite and >= 0".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be strictly increasing".into(),
        ));
    }

    let amps = make_css(spec);
    let point_at = |t: f64| -> Result<TrajectoryPoint> {
        let ev = evolve_lenient(spec, &amps, params, t, opts)?;
        Ok(TrajectoryPoint {
            shear: shearing_strength(params, spec, t)?,
            report: ev.report,
            moments: ev.moments,
        })
    };

    let points = t_grid
        .par_iter()
        .map(|&t| point_at(t))
        .collect::<Result<Vec<_>>>()?;

    // earliest grid point wins ties
    let best = points.iter().enumerate().fold(0, |b, (i, p)| {
        if p.report.xi2 < points[b].report.xi2 {
            i
        } else {
            b
        }
    });

    let mut minimum = points[best];
    if best > 0 && best + 1 < points.len() && minimum.report.xi2.is_finite() {
        let lo = t_grid[best - 1];
        let hi = t_grid[best + 1];
        let tol = REFINE_REL_TOL * t_grid[best];
        let objective = |t: f64| {
            evolve_lenient(spec, &amps, params, t, opts)
                .map(|e| e.report.xi2)
                .unwrap_or(f64::INFINITY)
        };
        let (t_star, _, _) = golden_section(&objective, lo, hi, tol);
        let refined = point_at(t_star)?;
        if refined.report.xi2 < minimum.report.xi2 {
            minimum = refined;
        }
    }

    Ok(TrajectoryResult { points, minimum })
}
