//! Mode structure, participation ratios and Kerr nonlinearities of a
//! flux-tunable SNAIL array embedded in a transmission-line resonator,
//! together with flux operating-point planning and shot-noise calibration
//! arithmetic for the resulting parametric amplifiers.
//!
//! SI units throughout; frequencies are angular (rad/s) unless a name ends
//! in `_hz`.

pub mod constants;
pub mod error;
pub mod kerr;
pub mod lumped;
pub mod modes;
pub mod noisecal;
pub mod planner;
pub mod roots;
pub mod snail;

pub use error::{Error, Result};
pub use kerr::{KerrMethod, KerrReport};
pub use lumped::{ArrayingScheme, LumpedModel};
pub use modes::{
    ArraySpec, DerivedParams, DeviceModel, ModeAmplitudes, ModeFrequency, ModeSolution, Parity, Region, ResonatorSpec,
};
pub use noisecal::{CalibrationRecord, FrequencySamples, NoiseCalibration, Systematics};
pub use planner::{CoverageMap, FluxMatch, FluxPlanner};
pub use snail::{SnailExpansion, SnailSpec};
