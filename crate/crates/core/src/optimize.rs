//! One-dimensional minimization (coarse grid, then golden section) and the
//! optimizations built on it: best shearing strength, best detuning, and
//! power-law scaling of the optimum with `S`.

use rayon::prelude::*;

use crate::dynamics::{t_from_qx, xi2_at, EvolveOptions};
use crate::error::{Error, Result};
use crate::field::DriveParams;
use crate::models::{ideal_optimum, xi2_scatter, FormulaMode, ScatterModelInput};
use crate::spin::EnsembleSpec;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `n` points from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|k| {
                    let f = k as f64 / last;
                    match spacing {
                        Spacing::Linear => lo + (hi - lo) * f,
                        Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * f).exp(),
                    }
                })
                .map(|v| v.clamp(lo.min(hi), hi.max(lo)))
                .collect()
        }
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search on `[lo, hi]` down to width `tol`.
/// Returns `(argmin, min, evaluations)` over every point it evaluated,
/// the final bracket ends included.
pub fn golden_section<F>(f: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64, usize)
where
    F: Fn(f64) -> f64,
{
    let (x, v, evals, _) = golden_bracket(f, lo, hi, tol);
    (x, v, evals)
}

fn golden_bracket<F>(f: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64, usize, (f64, f64))
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = finite_or_inf(f(c));
    let mut fd = finite_or_inf(f(d));
    let mut evals = 2;
    let mut best = if fd < fc { (d, fd) } else { (c, fc) };

    for _ in 0..300 {
        if b - a <= tol {
            break;
        }
        // ties move the bracket left so the earlier minimum wins
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = finite_or_inf(f(c));
            evals += 1;
            if fc <= best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = finite_or_inf(f(d));
            evals += 1;
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }

    for end in [a, b] {
        let v = finite_or_inf(f(end));
        evals += 1;
        if v < best.1 || (v == best.1 && end < best.0) {
            best = (end, v);
        }
    }
    (best.0, best.1, evals, (a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeResult {
    pub argmin: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Width of the final golden-section bracket.
    pub bracket: f64,
    /// The minimum sits on an end of the search range.
    pub at_boundary: bool,
}

/// Coarse-grid settings for [`minimize_1d_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearch {
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for GridSearch {
    fn default() -> Self {
        Self {
            points: 64,
            spacing: Spacing::Linear,
        }
    }
}

/// [`minimize_1d_with`] on a 64-point linear pre-grid.
pub fn minimize_1d<F>(objective: F, lo: f64, hi: f64, tol: f64) -> Result<OptimizeResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    minimize_1d_with(objective, lo, hi, tol, &GridSearch::default())
}

/// Evaluate on a pre-grid, bracket the smallest grid value (ties go to the
/// smaller argument) and refine it by golden section.
///
/// `tol` is an absolute width for linear grids and relative to the grid
/// minimizer for log grids.
pub fn minimize_1d_with<F>(
    objective: F,
    lo: f64,
    hi: f64,
    tol: f64,
    search: &GridSearch,
) -> Result<OptimizeResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need lo < hi, got [{lo}, {hi}]"
        )));
    }
    if search.spacing == Spacing::Log && lo <= 0.0 {
        return Err(Error::InvalidArgument("log grid needs lo > 0".into()));
    }
    if search.points < 2 {
        return Err(Error::InvalidArgument(
            "pre-grid needs at least 2 points".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let xs = grid(lo, hi, search.points, search.spacing);
    let vals: Vec<f64> = xs
        .par_iter()
        .map(|&x| finite_or_inf(objective(x)))
        .collect();
    let best = vals
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v < vals[b] { i } else { b });
    if vals[best].is_infinite() {
        return Err(Error::NoMinimum);
    }

    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(xs.len() - 1)];
    let abs_tol = match search.spacing {
        Spacing::Linear => tol,
        Spacing::Log => tol * xs[best],
    };
    let (gx, gv, evals, (fa, fb)) = golden_bracket(&objective, a, b, abs_tol);

    let (argmin, value) = if gv < vals[best] {
        (gx, gv)
    } else {
        (xs[best], vals[best])
    };
    let edge = 2.0 * abs_tol;
    Ok(OptimizeResult {
        argmin,
        value,
        evaluations: xs.len() + evals,
        bracket: fb - fa,
        at_boundary: argmin - lo <= edge || hi - argmin <= edge,
    })
}

/// Default `Qx` search range for the exact dynamics: `[0.1, min(4S, 1000)]`.
pub fn exact_qx_range(s: f64) -> (f64, f64) {
    (0.1, (4.0 * s).min(1e3))
}

pub const EXACT_GRID_POINTS: usize = 200;
pub const QX_REL_TOL: f64 = 1e-4;

/// Smallest `xi^2` of the exact dynamics over `Qx` (argmin is `Qx`).
pub fn exact_min_over_qx(
    spec: &EnsembleSpec,
    params: &DriveParams,
    opts: EvolveOptions,
) -> Result<OptimizeResult> {
    let (lo, hi) = exact_qx_range(spec.spin());
    // validate once so the objective cannot fail on conversion
    t_from_qx(params, spec, hi)?;
    let objective = |qx: f64| {
        t_from_qx(params, spec, qx)
            .and_then(|t| xi2_at(spec, params, t, opts))
            .unwrap_or(f64::NAN)
    };
    let search = GridSearch {
        points: EXACT_GRID_POINTS,
        spacing: Spacing::Log,
    };
    minimize_1d_with(objective, lo, hi, QX_REL_TOL, &search)
}

/// Scattering model objective; past one scattered photon per atom the
/// rotating-frame moments no longer describe a spin and the point is
/// rejected.
fn scatter_objective(qx: f64, x: f64, s: f64, eta: f64, mode: FormulaMode) -> f64 {
    match ScatterModelInput::new(qx, x, s, eta) {
        Ok(inp) if inp.rx() < 1.0 => xi2_scatter(&inp, mode).unwrap_or(f64::NAN),
        _ => f64::INFINITY,
    }
}

/// Scattering-model `Qx` search range `[0.1, S]`.
pub fn scatter_qx_range(s: f64) -> (f64, f64) {
    (0.1, s.max(1.0))
}

pub fn scatter_min_over_qx(x: f64, s: f64, eta: f64, mode: FormulaMode) -> Result<OptimizeResult> {
    let (lo, hi) = scatter_qx_range(s);
    let search = GridSearch {
        points: EXACT_GRID_POINTS,
        spacing: Spacing::Log,
    };
    minimize_1d_with(
        |qx| scatter_objective(qx, x, s, eta, mode),
        lo,
        hi,
        1e-6,
        &search,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningOptimum {
    /// Outer search over `x`; `argmin` is the detuning.
    pub outer: OptimizeResult,
    /// Optimal `Qx` at that detuning.
    pub qx: f64,
}

impl DetuningOptimum {
    pub fn x(&self) -> f64 {
        self.outer.argmin
    }

    pub fn xi2(&self) -> f64 {
        self.outer.value
    }
}

pub const DETUNING_GRID_POINTS: usize = 48;

/// Minimize the scattering model over `Qx` (inner) and `x` (outer).
pub fn optimal_over_detuning(s: f64, eta: f64, x_lo: f64, x_hi: f64) -> Result<DetuningOptimum> {
    if !(x_lo > 0.0 && x_hi >= x_lo && x_hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "detuning range must be positive, got [{x_lo}, {x_hi}]"
        )));
    }
    let inner = |x: f64| scatter_min_over_qx(x, s, eta, FormulaMode::Standard);
    if x_lo == x_hi {
        let r = inner(x_lo)?;
        return Ok(DetuningOptimum {
            outer: OptimizeResult {
                argmin: x_lo,
                value: r.value,
                evaluations: r.evaluations,
                bracket: 0.0,
                at_boundary: true,
            },
            qx: r.argmin,
        });
    }
    let search = GridSearch {
        points: DETUNING_GRID_POINTS,
        spacing: Spacing::Log,
    };
    let outer = minimize_1d_with(
        |x| inner(x).map(|r| r.value).unwrap_or(f64::INFINITY),
        x_lo,
        x_hi,
        1e-5,
        &search,
    )?;
    let qx = inner(outer.argmin)?.argmin;
    Ok(DetuningOptimum { outer, qx })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    /// Minimize the simulated dynamics over `Qx` for each `S`.
    #[default]
    Exact,
    /// Closed-form optimum of the ideal model.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConfig {
    pub mode: ScalingMode,
    pub x: f64,
    pub kappa: f64,
    pub omega: f64,
    pub beta0: f64,
    pub evolve: EvolveOptions,
}

impl Default for ScalingConfig {
    /// `kappa = 4`, `Omega = 0.01`, `beta0 = 1`, `x = 1`.
    fn default() -> Self {
        Self {
            mode: ScalingMode::Exact,
            x: 1.0,
            kappa: 4.0,
            omega: 0.01,
            beta0: 1.0,
            evolve: EvolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub s: f64,
    pub qx_opt: f64,
    pub xi2_min: f64,
    /// False when the minimizer landed on a range boundary.
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: Vec<ScalingPoint>,
}

pub const MIN_FIT_POINTS: usize = 4;

/// Least-squares line through `(ln s, ln y)`: `(slope, exp(intercept), R^2)`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "power-law fit needs two points".into(),
        ));
    }
    if points
        .iter()
        .any(|&(s, y)| !(s > 0.0 && y > 0.0 && s.is_finite() && y.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "power-law fit needs positive finite data".into(),
        ));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(s, y)| (s.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "power-law fit needs distinct S values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok((slope, intercept.exp(), r2))
}

fn scaling_point(config: &ScalingConfig, s: f64) -> Result<ScalingPoint> {
    match config.mode {
        ScalingMode::Analytic => {
            let o = ideal_optimum(config.x, s)?;
            Ok(ScalingPoint {
                s,
                qx_opt: o.qx,
                xi2_min: o.xi2,
                included: true,
            })
        }
        ScalingMode::Exact => {
            let spec = EnsembleSpec::new(s)?;
            let params = DriveParams::with_x(config.kappa, config.x, config.omega, config.beta0)?;
            let r = exact_min_over_qx(&spec, &params, config.evolve)?;
            Ok(ScalingPoint {
                s,
                qx_opt: r.argmin,
                xi2_min: r.value,
                included: !r.at_boundary && r.value.is_finite() && r.value > 0.0,
            })
        }
    }
}

/// Optimal squeezing for each `S` and the fitted exponent of `xi^2_min ~ S^p`.
pub fn scaling_fit(config: &ScalingConfig, s_list: &[f64]) -> Result<ScalingFit> {
    if s_list.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least {MIN_FIT_POINTS} spins, got {}",
            s_list.len()
        )));
    }
    if s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "spin list must be increasing".into(),
        ));
    }

    let results: Vec<Result<ScalingPoint>> = s_list
        .par_iter()
        .map(|&s| scaling_point(config, s))
        .collect();
    let mut points = Vec::with_capacity(results.len());
    for (r, &s) in results.into_iter().zip(s_list) {
        points.push(r.map_err(|e| Error::Scaling {
            s,
            source: Box::new(e),
        })?);
    }

    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.included)
        .map(|p| (p.s, p.xi2_min))
        .collect();
    if data.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "only {} of {} minima are interior; need {MIN_FIT_POINTS}",
            data.len(),
            points.len()
        )));
    }
    let (exponent, prefactor, r_squared) = power_law_fit(&data)?;
    Ok(ScalingFit {
        exponent,
        prefactor,
        r_squared,
        points,
    })
}
