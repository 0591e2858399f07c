use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("equilibrium phase did not converge at external flux {phi_ext} Φ0 (residual {residual:e})")]
    NonConvergence { phi_ext: f64, residual: f64 },

    #[error("non-positive inductance: alpha = {alpha}")]
    NonPositiveInductance { alpha: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("frequency {omega:e} rad/s is at or above the validity limit {limit:e} rad/s")]
    AbovePlasmaCutoff { omega: f64, limit: f64 },

    #[error("idler frequency 2ω_ap − ω_s = {omega_idler:e} rad/s is not positive")]
    NegativeIdler { omega_idler: f64 },

    #[error("phase mismatch |{which}| = {value:e} rad/cell is below {threshold:e}")]
    SmallDenominator {
        which: &'static str,
        value: f64,
        threshold: f64,
    },

    #[error("integration failed at x = {x}: {reason}")]
    StepFailure { x: f64, reason: String },

    #[error("singular fit in bin at {omega:e} rad/s: {reason}")]
    SingularFit { omega: f64, reason: String },

    #[error("gain must be positive, got {0}")]
    NonPositiveGain(f64),

    #[error("point {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(index: usize, source: Error) -> Error {
        Error::AtIndex {
            index,
            source: Box::new(source),
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NonPositiveInductance { .. } => "NonPositiveInductance",
            Error::NotFound(_) => "NotFound",
            Error::AbovePlasmaCutoff { .. } => "AbovePlasmaCutoff",
            Error::NegativeIdler { .. } => "NegativeIdler",
            Error::SmallDenominator { .. } => "SmallDenominator",
            Error::StepFailure { .. } => "StepFailure",
            Error::SingularFit { .. } => "SingularFit",
            Error::NonPositiveGain(_) => "NonPositiveGain",
            Error::AtIndex { source, .. } => source.kind(),
        }
    }
}
