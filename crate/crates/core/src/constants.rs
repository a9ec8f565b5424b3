//! Physical constants (SI, 2019 exact definitions).

use std::f64::consts::PI;

/// Planck constant [J s].
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge [C].
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Magnetic flux quantum h/2e [Wb].
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
/// Reduced flux quantum ħ/2e [Wb].
pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * ELEMENTARY_CHARGE);
/// Superconducting resistance quantum ħ/(2e)² [Ω].
pub const RESISTANCE_QUANTUM: f64 = HBAR / (4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

/// Half a photon of noise at angular frequency `omega`, ħω/2k_B [K].
pub fn quantum_noise_temperature(omega: f64) -> f64 {
    HBAR * omega / (2.0 * BOLTZMANN)
}
