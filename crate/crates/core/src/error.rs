use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The potential has no unique stable minimum (multi-well regime or
    /// non-positive curvature).
    #[error("no unique potential minimum for alpha = {alpha} at flux {flux_frac} Φ0: {reason}")]
    NoMinimum { alpha: f64, flux_frac: f64, reason: String },

    #[error("curvature c2 = {c2} is not positive; expansion unusable")]
    ExpansionFailure { c2: f64 },

    /// The requested operating point needs a negative lead length, i.e. the
    /// array alone already resonates below it.
    #[error("no positive lead length for M = {cells} (critical M = {critical:.3})")]
    NoPositiveLength { cells: u32, critical: f64 },

    #[error("frequency {omega:.6e} rad/s is at or above the plasma frequency {omega_p:.6e} rad/s")]
    FrequencyAbovePlasma { omega: f64, omega_p: f64 },

    #[error("root bracket refinement failed on [{lo:.9e}, {hi:.9e}]: {reason}")]
    SolverFailure { lo: f64, hi: f64, reason: String },

    #[error("boundary matrix null space is not one-dimensional at ω = {omega:.9e} rad/s (condition {condition:.3e})")]
    DegenerateNullspace { omega: f64, condition: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit produced non-positive gain {gain:.6e}")]
    NegativeGain { gain: f64 },

    #[error("non-physical result: {0}")]
    NonphysicalResult(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {value}") })
    }
}
