use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),

    #[error("spin projection m = {m} outside [-{s}, {s}]")]
    Index { s: f64, m: f64 },

    #[error("phase band incomplete: offset {offset} has {found} entries, expected {expected}")]
    IncompleteBand {
        offset: usize,
        found: usize,
        expected: usize,
    },

    #[error("mean spin vanished (|<S>| = {norm:e}); squeezing direction undefined")]
    DegenerateDirection { norm: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {what} (achieved tolerance {achieved:e})")]
    NumericFailure { what: String, achieved: f64 },

    #[error("shearing strength {q} cannot be reached in finite time (zero coupling or drive)")]
    NoFiniteTime { q: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("detuning x = {x} below the validity bound {bound}")]
    BelowRegime { x: f64, bound: f64 },

    #[error("negative discriminant {discriminant:e} in the as-written squeezing formula")]
    ComplexDiscriminant { discriminant: f64 },

    #[error("objective is not finite anywhere on the search grid")]
    NoMinimum,

    #[error("scaling fit failed at S = {s}: {source}")]
    Scaling {
        s: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors that mean the model was asked about a regime it does
    /// not cover, as opposed to a numerical breakdown.
    pub fn is_out_of_regime(&self) -> bool {
        match self {
            Error::BelowRegime { .. } | Error::ComplexDiscriminant { .. } => true,
            Error::Scaling { source, .. } => source.is_out_of_regime(),
            _ => false,
        }
    }
}
