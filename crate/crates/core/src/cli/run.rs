//! Execute a [`RunConfig`] and build its output tables.

use log::{info, warn};
use rayon::prelude::*;

use super::config::{Command, RunConfig};
use super::csv::{Cell, CsvTable};
use crate::dynamics::{sweep_trajectory, t_from_qx, EvolveOptions};
use crate::error::{Error, Result};
use crate::field::DriveParams;
use crate::models::{validity, xi2_scatter, FormulaMode, ScatterModelInput};
use crate::optimize::{
    exact_min_over_qx, optimal_over_detuning, scaling_fit, scatter_min_over_qx, ScalingConfig,
};
use crate::spin::EnsembleSpec;

pub const TRAJ_HEADER: [&str; 7] = ["t", "Q", "Qx", "xi2", "contrast", "Sx", "varMin"];
pub const SCALING_HEADER: [&str; 3] = ["S", "Qx_opt", "xi2_min"];
pub const SCALING_FOOTER: [&str; 3] = ["exponent", "prefactor", "rSquared"];
pub const SCATTER_HEADER: [&str; 4] = ["Qx", "xi2_standard", "xi2_aswritten", "Rx"];
pub const DETUNING_HEADER: [&str; 3] = ["x", "Qx_opt", "xi2_min"];
pub const VALIDATE_HEADER: [&str; 4] = ["check", "value", "bound", "pass"];

// present because from_map checked them
fn get(v: Option<f64>) -> f64 {
    v.expect("required key validated")
}

fn drive(cfg: &RunConfig, x: f64) -> Result<DriveParams> {
    let p = DriveParams::with_x(get(cfg.kappa), x, get(cfg.omega), get(cfg.beta0))?;
    match cfg.rates {
        Some(r) => p.with_rates(r),
        None => Ok(p),
    }
}

fn evolve_options(cfg: &RunConfig) -> EvolveOptions {
    EvolveOptions {
        phase: cfg.phase,
        overlap: cfg.overlap,
    }
}

fn eta_label(eta: f64) -> String {
    format!("eta={}", super::csv::fmt_g(eta))
}

pub fn run(cfg: &RunConfig) -> Result<Vec<CsvTable>> {
    match cfg.command {
        Command::Traj => traj(cfg).map(|t| vec![t]),
        Command::SweepDetuning => sweep_detuning(cfg).map(|t| vec![t]),
        Command::Scaling => scaling(cfg).map(|t| vec![t]),
        Command::Scatter => scatter(cfg),
        Command::OptimizeDetuning => optimize_detuning(cfg),
        Command::Validate => validate(cfg).map(|t| vec![t]),
    }
}

fn traj(cfg: &RunConfig) -> Result<CsvTable> {
    let spec = EnsembleSpec::new(get(cfg.s))?;
    let params = drive(cfg, get(cfg.x))?;
    let times: Vec<f64> = match (&cfg.t_grid, &cfg.qx_grid) {
        (Some(g), _) => g.values(),
        (None, Some(g)) => g
            .values()
            .into_iter()
            .map(|q| t_from_qx(&params, &spec, q))
            .collect::<Result<_>>()?,
        (None, None) => unreachable!("grid presence validated"),
    };
    let traj = sweep_trajectory(&spec, &params, &times, evolve_options(cfg))?;
    let m = &traj.minimum;
    info!(
        "minimum xi2 = {} at t = {} (Qx = {})",
        m.report.xi2, m.shear.t, m.shear.qx
    );

    let mut table = CsvTable::new(&TRAJ_HEADER);
    for p in &traj.points {
        table.push(vec![
            p.shear.t,
            p.shear.q,
            p.shear.qx,
            p.report.xi2,
            p.report.contrast,
            p.moments.mean[0],
            p.report.var_min,
        ]);
    }
    Ok(table)
}

fn sweep_detuning(cfg: &RunConfig) -> Result<CsvTable> {
    let spec = EnsembleSpec::new(get(cfg.s))?;
    let xs = cfg.x_grid.as_ref().expect("validated").values();
    let opts = evolve_options(cfg);
    let rows: Vec<Result<Vec<f64>>> = xs
        .par_iter()
        .map(|&x| {
            let params = drive(cfg, x)?;
            let r = exact_min_over_qx(&spec, &params, opts)?;
            if r.at_boundary {
                warn!("x = {x}: minimum on the edge of the Qx range");
            }
            Ok(vec![x, r.argmin, r.value])
        })
        .collect();
    let mut table = CsvTable::new(&DETUNING_HEADER);
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

fn scaling(cfg: &RunConfig) -> Result<CsvTable> {
    let defaults = ScalingConfig::default();
    let sc = ScalingConfig {
        mode: cfg.scaling_mode,
        x: get(cfg.x),
        kappa: cfg.kappa.unwrap_or(defaults.kappa),
        omega: cfg.omega.unwrap_or(defaults.omega),
        beta0: cfg.beta0.unwrap_or(defaults.beta0),
        evolve: evolve_options(cfg),
    };
    let fit = scaling_fit(&sc, cfg.s_list.as_ref().expect("validated"))?;
    let mut table = CsvTable::new(&SCALING_HEADER);
    for p in &fit.points {
        if !p.included {
            warn!("S = {}: boundary minimum left out of the fit", p.s);
        }
        table.push(vec![p.s, p.qx_opt, p.xi2_min]);
    }
    table.footer = Some((
        SCALING_FOOTER.iter().map(|s| s.to_string()).collect(),
        vec![fit.exponent, fit.prefactor, fit.r_squared],
    ));
    Ok(table)
}

fn scatter(cfg: &RunConfig) -> Result<Vec<CsvTable>> {
    let s = get(cfg.s);
    let x = get(cfg.x);
    let qxs = cfg.qx_grid.as_ref().expect("validated").values();
    let mut tables = Vec::new();
    for &eta in &cfg.eta {
        let mut table = CsvTable::new(&SCATTER_HEADER).labeled(eta_label(eta));
        for &qx in &qxs {
            let inp = ScatterModelInput::new(qx, x, s, eta)?;
            let value = |mode| match xi2_scatter(&inp, mode) {
                Ok(v) => Ok(v),
                Err(Error::ComplexDiscriminant { .. }) => Ok(f64::NAN),
                Err(e) => Err(e),
            };
            table.push(vec![
                qx,
                value(FormulaMode::Standard)?,
                value(FormulaMode::AsWritten)?,
                inp.rx(),
            ]);
        }
        match scatter_min_over_qx(x, s, eta, cfg.formula) {
            Ok(m) => info!(
                "eta = {eta}: minimum xi2 = {} at Qx = {}",
                m.value, m.argmin
            ),
            Err(e) => warn!("eta = {eta}: no minimum ({e})"),
        }
        tables.push(table);
    }
    Ok(tables)
}

fn optimize_detuning(cfg: &RunConfig) -> Result<Vec<CsvTable>> {
    let s = get(cfg.s);
    let (lo, hi) = cfg.x_grid.as_ref().expect("validated").bounds();
    let results: Vec<Result<_>> = cfg
        .eta
        .par_iter()
        .map(|&eta| optimal_over_detuning(s, eta, lo, hi))
        .collect();
    let mut tables = Vec::new();
    for (r, &eta) in results.into_iter().zip(&cfg.eta) {
        let opt = r?;
        if opt.outer.at_boundary && lo < hi {
            warn!("eta = {eta}: optimal detuning on the edge of [{lo}, {hi}]");
        }
        let mut table = CsvTable::new(&DETUNING_HEADER).labeled(eta_label(eta));
        table.push(vec![opt.x(), opt.qx, opt.xi2()]);
        tables.push(table);
    }
    Ok(tables)
}

fn validate(cfg: &RunConfig) -> Result<CsvTable> {
    let s = get(cfg.s);
    let x = get(cfg.x);
    let params = drive(cfg, x)?;
    let report = validity(&params, s, get(cfg.qx));
    info!("detuning regime at x = {x}: {:?}", report.detuning_regime);
    let mut table = CsvTable::new(&VALIDATE_HEADER);
    let flag = |b: bool| Cell::Text(if b { "true" } else { "false" }.into());
    for q in report.inequalities() {
        table.push_cells(vec![
            Cell::Text(q.name.into()),
            Cell::Num(q.value),
            Cell::Num(q.bound),
            flag(q.pass),
        ]);
    }
    // `x` must clear the lower detuning bound
    table.push_cells(vec![
        Cell::Text("detuning_lower".into()),
        Cell::Num(x.abs()),
        Cell::Num(report.detuning_lower),
        flag(x.abs() >= report.detuning_lower),
    ]);
    Ok(table)
}

/// Default plot columns per command.
pub fn default_plot(command: Command) -> Option<(&'static str, &'static str)> {
    match command {
        Command::Traj => Some(("Qx", "xi2")),
        Command::SweepDetuning => Some(("x", "xi2_min")),
        Command::Scaling => Some(("S", "xi2_min")),
        Command::Scatter => Some(("Qx", "xi2_standard")),
        Command::OptimizeDetuning | Command::Validate => None,
    }
}
