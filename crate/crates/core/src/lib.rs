//! Spin squeezing of an atomic ensemble by a driven, detuned optical cavity.
//!
//! The collective spin starts in the x-polarized coherent state. Each
//! `S_z` branch drives the cavity to its own coherent field; tracing the
//! field out leaves a band of phases and overlaps from which the spin
//! moments and the Wineland squeezing parameter follow.

// `!(a < b)` comparisons deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod models;
pub mod optimize;
pub mod quad;
pub mod special;
pub mod spin;

pub use dynamics::{
    evolve, shearing_strength, sweep_trajectory, t_from_q, t_from_qx, xi2_at, EvolveOptions,
    Evolved, ShearingPoint, TrajectoryPoint, TrajectoryResult,
};
pub use error::{Error, Result};
pub use field::{
    coherent_overlap, phase_analytic, phase_numeric, resolve_detuning, steady_field,
    transient_field, BandEntry, DriveParams, OverlapMode, PhaseBand, PhaseMode, PhysicalRates,
};
pub use models::{
    classify_detuning, ideal_optimum, validity, xi2_ideal, xi2_scatter, xi2_scatter_asymptotic,
    DetuningRegime, FormulaMode, IdealModelInput, Optimum, OptimumBranch, ScatterModelInput,
    ValidityReport,
};
pub use optimize::{
    minimize_1d, optimal_over_detuning, scaling_fit, OptimizeResult, ScalingConfig, ScalingFit,
    ScalingMode,
};
pub use spin::{
    make_css, moments_from_band, squeezing_parameter, CssAmplitudes, EnsembleSpec, MomentSet,
    SqueezeReport,
};
