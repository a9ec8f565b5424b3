//! Self-Kerr coefficients of the array modes from the quartic term of the
//! SNAIL potential, treated to first order.
//!
//! The mode coordinate `Φ_m` multiplies the max-normalized profile; its
//! zero-point amplitude follows from the effective capacitance and
//! inductance of the profile. With `H_4 = g_4 (a + a†)^4` the reported
//! coefficient is `K = 12 g_4 / ħ`, signed like `c_4`.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, REDUCED_FLUX_QUANTUM, RESISTANCE_QUANTUM};
use crate::error::{Error, Result};
use crate::modes::{derived_params, mode_energies, mode_profile, nth_mode, ArraySpec, DeviceModel, ModeSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KerrMethod {
    /// Analytic expression for zero-length leads.
    ClosedForm,
    /// Overlap integral of the numerically solved profile.
    NumericBbq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrReport {
    pub mode_index: usize,
    /// Self-Kerr [rad/s].
    pub kerr: f64,
    pub method: KerrMethod,
    pub flux_frac: f64,
    /// Set away from zero flux, where the cubic term also shifts the Kerr
    /// at second order; that correction is not included.
    pub c3_caveat: bool,
}

impl KerrReport {
    /// Self-Kerr in Hz (`K / 2π`).
    pub fn kerr_hz(&self) -> f64 {
        self.kerr / std::f64::consts::TAU
    }
}

/// `∫ φ'^4` over `|x| ≤ length/2` for `φ = A cos(kx) + B sin(kx)`.
pub fn quartic_gradient_integral(a: f64, b: f64, k: f64, length: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let phase = k * length;
    k.powi(3) / 16.0
        * (6.0 * (a2 + b2).powi(2) * phase
            + 8.0 * (b2 * b2 - a2 * a2) * phase.sin()
            + (a2 * a2 - 6.0 * a2 * b2 + b2 * b2) * (2.0 * phase).sin())
}

/// Numeric self-Kerr of a solved mode.
pub fn self_kerr_numeric(device: &DeviceModel, mode: &ModeSolution) -> Result<KerrReport> {
    let expansion = device.array.expansion()?;
    let energies = mode_energies(device, mode)?;
    let l_eff = 1.0 / energies.inverse_inductance();
    let zpf_sq = 0.5 * HBAR * (l_eff / energies.capacitance).sqrt();
    let a = device.array.cell_length;
    let quartic = quartic_gradient_integral(
        mode.amplitudes.array_cos,
        mode.amplitudes.array_sin,
        mode.k_s,
        device.array.length(),
    );
    // Σ_cells E_J c4/4! (a φ'/φ0)^4 = c4 a³ ∫φ'^4 / (24 L_J φ0²)
    let phi0_sq = REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM;
    let g4 = expansion.c(4) * a.powi(3) * quartic * zpf_sq * zpf_sq
        / (24.0 * device.array.snail.junction_inductance * phi0_sq);
    let kerr = 12.0 * g4 / HBAR;
    if !kerr.is_finite() {
        return Err(Error::SolverFailure { lo: mode.omega, hi: mode.omega, reason: "non-finite Kerr".into() });
    }
    Ok(KerrReport {
        mode_index: mode.n,
        kerr,
        method: KerrMethod::NumericBbq,
        flux_frac: device.array.flux_frac,
        c3_caveat: device.array.flux_frac.fract() != 0.0,
    })
}

/// Self-Kerr of mode `n`, solving the profile first.
pub fn self_kerr(device: &DeviceModel, n: usize) -> Result<KerrReport> {
    let mode = mode_profile(device, &nth_mode(device, n)?)?;
    self_kerr_numeric(device, &mode)
}

/// Zero-length-lead self-Kerr at mode frequency `omega`:
/// `K = (3/16) (c4/c2) ω² L_S / (M R_q)`.
pub fn closed_form_kerr_at(array: &ArraySpec, omega: f64) -> Result<f64> {
    let expansion = array.expansion()?;
    let p = derived_params(array)?;
    if omega >= p.omega_p {
        return Err(Error::FrequencyAbovePlasma { omega, omega_p: p.omega_p });
    }
    Ok(3.0 / 16.0 * expansion.c(4) / expansion.c(2) * omega * omega * p.linear_inductance
        / (array.cells as f64 * RESISTANCE_QUANTUM))
}

/// Closed-form self-Kerr of mode `n` of an array with zero-length leads.
pub fn self_kerr_closed_form(array: &ArraySpec, n: usize) -> Result<KerrReport> {
    let omega = crate::modes::closed_form_frequencies(array, n)?;
    Ok(KerrReport {
        mode_index: n,
        kerr: closed_form_kerr_at(array, omega)?,
        method: KerrMethod::ClosedForm,
        flux_frac: array.flux_frac,
        c3_caveat: array.flux_frac.fract() != 0.0,
    })
}
