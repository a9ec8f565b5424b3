//! Linear eigenmodes of a SNAIL array embedded between two transmission-line
//! leads, in the continuum approximation.
//!
//! Geometry: the array occupies `|x| < d0/2` with `d0 = M a`; each lead has
//! length `d_r`, and both outer ends carry zero current.

mod dispersion;
mod profile;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::snail::{taylor_coefficients, SnailExpansion, SnailSpec};

pub use dispersion::{mode_frequencies, nth_mode};
pub use profile::{mode_energies, mode_profile, participation, solve_modes, ModeEnergies};

/// Geometry and electrical parameters of the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    /// Number of unit cells `M`.
    pub cells: u32,
    /// Unit-cell length `a` [m]. Only enters through products that cancel
    /// in every reported observable.
    pub cell_length: f64,
    /// Capacitance to ground per cell `C_0` [F].
    pub ground_capacitance: f64,
    /// Shunt capacitance across each cell `C_S` [F]. Zero removes the
    /// plasma resonance (`ω_p → ∞`).
    pub shunt_capacitance: f64,
    pub snail: SnailSpec,
    /// Φ/Φ0.
    pub flux_frac: f64,
}

impl ArraySpec {
    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 {
            return Err(Error::InvalidParameter { name: "cells", reason: "must be at least 1".into() });
        }
        check_positive("cell_length", self.cell_length)?;
        check_positive("ground_capacitance", self.ground_capacitance)?;
        if !(self.shunt_capacitance.is_finite() && self.shunt_capacitance >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "shunt_capacitance",
                reason: format!("must be finite and >= 0, got {}", self.shunt_capacitance),
            });
        }
        self.snail.validate()
    }

    pub fn with_cells(mut self, cells: u32) -> Self {
        self.cells = cells;
        self
    }

    pub fn with_flux(mut self, flux_frac: f64) -> Self {
        self.flux_frac = flux_frac;
        self
    }

    /// SNAIL expansion at this array's flux, up to fourth order.
    pub fn expansion(&self) -> Result<SnailExpansion> {
        taylor_coefficients(&self.snail, self.flux_frac, 4)
    }

    /// Total array length `d0 = M a` [m].
    pub fn length(&self) -> f64 {
        self.cells as f64 * self.cell_length
    }
}

/// Characteristic frequencies and impedances of the array line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// `L_S(Φ)` [H].
    pub linear_inductance: f64,
    /// `1/sqrt(L_S C_S)` [rad/s]; infinite when `C_S = 0`.
    pub omega_p: f64,
    /// `1/sqrt(L_S C_0)` [rad/s].
    pub omega_0: f64,
    /// `sqrt(L_S / C_S)` [Ω]; infinite when `C_S = 0`.
    pub shunt_impedance: f64,
    /// `sqrt(L_S / C_0)` [Ω], the impedance of the array as a transmission
    /// line. This is the impedance that enters the lead/array matching.
    pub line_impedance: f64,
}

pub fn derived_params(array: &ArraySpec) -> Result<DerivedParams> {
    array.validate()?;
    let l_s = array.expansion()?.linear_inductance;
    Ok(derived_from_inductance(array, l_s))
}

pub(crate) fn derived_from_inductance(array: &ArraySpec, l_s: f64) -> DerivedParams {
    let (omega_p, shunt_impedance) = if array.shunt_capacitance > 0.0 {
        (1.0 / (l_s * array.shunt_capacitance).sqrt(), (l_s / array.shunt_capacitance).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    DerivedParams {
        linear_inductance: l_s,
        omega_p,
        omega_0: 1.0 / (l_s * array.ground_capacitance).sqrt(),
        shunt_impedance,
        line_impedance: (l_s / array.ground_capacitance).sqrt(),
    }
}

/// Transmission-line leads on both sides of the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    /// Characteristic impedance `Z_c` [Ω].
    pub impedance: f64,
    /// Phase velocity `v_r` [m/s].
    pub phase_velocity: f64,
    /// Length of each arm `d_r` [m]; zero is represented exactly.
    pub arm_length: f64,
}

impl ResonatorSpec {
    pub fn validate(&self) -> Result<()> {
        check_positive("impedance", self.impedance)?;
        check_positive("phase_velocity", self.phase_velocity)?;
        if !(self.arm_length.is_finite() && self.arm_length >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "arm_length",
                reason: format!("must be finite and >= 0, got {}", self.arm_length),
            });
        }
        Ok(())
    }

    /// Inductance per unit length `ℓ_r` [H/m].
    pub fn inductance_per_length(&self) -> f64 {
        self.impedance / self.phase_velocity
    }

    /// Capacitance per unit length `c_r` [F/m].
    pub fn capacitance_per_length(&self) -> f64 {
        1.0 / (self.impedance * self.phase_velocity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub array: ArraySpec,
    pub resonator: ResonatorSpec,
}

impl DeviceModel {
    pub fn new(array: ArraySpec, resonator: ResonatorSpec) -> Result<Self> {
        array.validate()?;
        resonator.validate()?;
        Ok(DeviceModel { array, resonator })
    }

    pub fn with_flux(mut self, flux_frac: f64) -> Self {
        self.array.flux_frac = flux_frac;
        self
    }

    pub fn with_arm_length(mut self, arm_length: f64) -> Self {
        self.resonator.arm_length = arm_length;
        self
    }

    /// Total device length `d1 = M a + 2 d_r` [m].
    pub fn length(&self) -> f64 {
        self.array.length() + 2.0 * self.resonator.arm_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    /// `φ(-x) = -φ(x)`; the fundamental mode is odd.
    Odd,
    /// `φ(-x) = φ(x)`.
    Even,
}

impl Parity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

/// One root of the dispersion relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeFrequency {
    /// 1-based index in ascending frequency, counted from the fundamental.
    pub n: usize,
    /// Angular frequency [rad/s].
    pub omega: f64,
    pub parity: Parity,
}

/// Piecewise flux amplitudes, defined up to an overall factor.
///
/// In the array `φ = A_S cos(k_S x) + B_S sin(k_S x)` with `x` measured from
/// the array centre. In each lead `φ = A cos(k_r ξ) + B sin(k_r ξ)` where `ξ`
/// is measured from the adjoining array edge (`ξ ≤ 0` on the left, `ξ ≥ 0`
/// on the right), which keeps the lead amplitudes independent of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub left_cos: f64,
    pub left_sin: f64,
    pub array_cos: f64,
    pub array_sin: f64,
    pub right_cos: f64,
    pub right_sin: f64,
}

impl ModeAmplitudes {
    pub fn to_array(&self) -> [f64; 6] {
        [self.left_cos, self.left_sin, self.array_cos, self.array_sin, self.right_cos, self.right_sin]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        ModeAmplitudes {
            left_cos: v[0],
            left_sin: v[1],
            array_cos: v[2],
            array_sin: v[3],
            right_cos: v[4],
            right_sin: v[5],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * factor))
    }
}

/// A solved eigenmode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub n: usize,
    pub parity: Parity,
    /// [rad/s]
    pub omega: f64,
    /// Lead wave-vector [1/m].
    pub k_r: f64,
    /// Array wave-vector [1/m].
    pub k_s: f64,
    /// Max-flux normalized (`max |φ(x)| = 1`).
    pub amplitudes: ModeAmplitudes,
    /// Inductive energy participation ratio of the array.
    pub epr: f64,
    /// Relative residual `|B v| / (|B| |v|)` of the boundary conditions.
    pub residual: f64,
}

impl ModeSolution {
    /// Flux profile at position `x` measured from the array centre.
    pub fn flux_at(&self, device: &DeviceModel, x: f64) -> f64 {
        let half = 0.5 * device.array.length();
        let amp = &self.amplitudes;
        if x < -half {
            let xi = x + half;
            amp.left_cos * (self.k_r * xi).cos() + amp.left_sin * (self.k_r * xi).sin()
        } else if x > half {
            let xi = x - half;
            amp.right_cos * (self.k_r * xi).cos() + amp.right_sin * (self.k_r * xi).sin()
        } else {
            amp.array_cos * (self.k_s * x).cos() + amp.array_sin * (self.k_s * x).sin()
        }
    }
}

/// Critical array size at which the leads shrink to zero length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSize {
    pub value: f64,
    pub floor: u64,
}

/// `M_c = π (ω_0/ω_op) sqrt(1 - ω_op²/ω_p²)`.
pub fn critical_m(omega_op: f64, array: &ArraySpec) -> Result<CriticalSize> {
    check_positive("omega_op", omega_op)?;
    let p = derived_params(array)?;
    let s = plasma_factor(omega_op, p.omega_p)?;
    let value = PI * p.omega_0 / omega_op * s;
    Ok(CriticalSize { value, floor: value.floor() as u64 })
}

/// `sqrt(1 - ω²/ω_p²)`, rejecting frequencies at or above `ω_p`.
pub(crate) fn plasma_factor(omega: f64, omega_p: f64) -> Result<f64> {
    if omega >= omega_p {
        return Err(Error::FrequencyAbovePlasma { omega, omega_p });
    }
    Ok(if omega_p.is_infinite() { 1.0 } else { (1.0 - (omega / omega_p).powi(2)).sqrt() })
}

/// Lead length `d_r` placing the fundamental (odd) mode at `omega_op`.
pub fn resonator_length_for(omega_op: f64, array: &ArraySpec, impedance: f64, phase_velocity: f64) -> Result<f64> {
    check_positive("omega_op", omega_op)?;
    check_positive("impedance", impedance)?;
    check_positive("phase_velocity", phase_velocity)?;
    let p = derived_params(array)?;
    let s = plasma_factor(omega_op, p.omega_p)?;
    let half_phase = array.cells as f64 * omega_op / (2.0 * p.omega_0 * s);
    if half_phase >= FRAC_PI_2 {
        return Err(Error::NoPositiveLength { cells: array.cells, critical: PI * p.omega_0 / omega_op * s });
    }
    let ratio = impedance / p.line_impedance * s / half_phase.tan();
    Ok(phase_velocity / omega_op * ratio.atan())
}

/// Device whose fundamental sits at `omega_op` when the array is short
/// enough, and with zero-length leads otherwise.
pub fn design_for_frequency(
    omega_op: f64,
    array: ArraySpec,
    impedance: f64,
    phase_velocity: f64,
) -> Result<DeviceModel> {
    let arm_length = match resonator_length_for(omega_op, &array, impedance, phase_velocity) {
        Ok(d) => d,
        Err(Error::NoPositiveLength { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    DeviceModel::new(array, ResonatorSpec { impedance, phase_velocity, arm_length })
}

/// `ω_n = ω_p / sqrt(1 + (M ω_p / (π n ω_0))²)` for zero-length leads.
pub fn closed_form_frequencies(array: &ArraySpec, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "mode index is 1-based".into() });
    }
    let p = derived_params(array)?;
    let linear = PI * n as f64 * p.omega_0 / array.cells as f64;
    Ok(if p.omega_p.is_infinite() { linear } else { p.omega_p / (1.0 + (p.omega_p / linear).powi(2)).sqrt() })
}

/// Qualitative mode-structure regime versus array size at fixed
/// fundamental frequency. Labels are advisory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
        }
    }
}

/// Region heuristic: IV for zero-length leads; I while the per-cell
/// participation stays within 10% of its small-array value `p_j`; II before
/// the asymptotes `p_j` and `1/M` cross, III after.
pub fn classify_region(cells: u32, epr_per_cell: f64, small_array_epr_per_cell: f64, arm_length: f64) -> Region {
    let m = cells as f64;
    if arm_length == 0.0 {
        Region::IV
    } else if epr_per_cell >= 0.9 * small_array_epr_per_cell {
        Region::I
    } else if m * small_array_epr_per_cell < 1.0 {
        Region::II
    } else {
        Region::III
    }
}
