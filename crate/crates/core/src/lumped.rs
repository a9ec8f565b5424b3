//! Lumped single-mode models of junction arraying and their quartic Kerr
//! scaling with the array size.
//!
//! `K` is reported as `12 g4 / ħ` where `g4 (a + a†)^4` is the quartic term,
//! i.e. the same normalization as the distributed self-Kerr. The sign
//! follows the quartic coefficient, so bare junctions give `K < 0`.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, REDUCED_FLUX_QUANTUM, RESISTANCE_QUANTUM};
use crate::error::{check_positive, Error, Result};

/// `M · p_J` above which the series-inductance model is flagged as outside
/// its small-participation validity range.
pub const SERIES_VALIDITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ArrayingScheme {
    /// M junctions of inductance `L_J / M`: mode inductance, capacitance,
    /// frequency and impedance are independent of M.
    ScaledJunctions,
    /// M identical junctions; the shunt capacitance is scaled as `C / M` to
    /// hold the frequency.
    FixedJunctions,
    /// M identical junctions in series with a linear inductance that
    /// dominates the mode inductance.
    SeriesInductance { stray_inductance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LumpedModel {
    pub scheme: ArrayingScheme,
    pub cells: u32,
    /// Reference single-junction inductance [H].
    pub junction_inductance: f64,
    /// Reference shunt capacitance [F].
    pub capacitance: f64,
}

impl LumpedModel {
    pub fn new(scheme: ArrayingScheme, cells: u32, junction_inductance: f64, capacitance: f64) -> Result<Self> {
        let model = LumpedModel { scheme, cells, junction_inductance, capacitance };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 {
            return Err(Error::InvalidParameter { name: "cells", reason: "must be at least 1".into() });
        }
        check_positive("junction_inductance", self.junction_inductance)?;
        check_positive("capacitance", self.capacitance)?;
        if let ArrayingScheme::SeriesInductance { stray_inductance } = self.scheme {
            check_positive("stray_inductance", stray_inductance)?;
        }
        Ok(())
    }

    fn m(&self) -> f64 {
        self.cells as f64
    }

    /// Inductance of the single lumped mode [H].
    pub fn mode_inductance(&self) -> f64 {
        match self.scheme {
            ArrayingScheme::ScaledJunctions => self.junction_inductance,
            ArrayingScheme::FixedJunctions => self.m() * self.junction_inductance,
            ArrayingScheme::SeriesInductance { stray_inductance } => stray_inductance,
        }
    }

    /// Capacitance of the single lumped mode [F].
    pub fn mode_capacitance(&self) -> f64 {
        match self.scheme {
            ArrayingScheme::FixedJunctions => self.capacitance / self.m(),
            _ => self.capacitance,
        }
    }

    /// Resonance frequency [rad/s].
    pub fn resonance_frequency(&self) -> f64 {
        1.0 / (self.mode_inductance() * self.mode_capacitance()).sqrt()
    }

    /// Mode impedance [Ω].
    pub fn impedance(&self) -> f64 {
        (self.mode_inductance() / self.mode_capacitance()).sqrt()
    }

    /// `p_J = L_J / L` for the series-inductance scheme.
    pub fn junction_participation(&self) -> Option<f64> {
        match self.scheme {
            ArrayingScheme::SeriesInductance { stray_inductance } => Some(self.junction_inductance / stray_inductance),
            _ => None,
        }
    }

    /// False when the series-inductance model is used with `M p_J` above
    /// [`SERIES_VALIDITY_LIMIT`].
    pub fn within_validity(&self) -> bool {
        self.junction_participation().is_none_or(|p| self.m() * p <= SERIES_VALIDITY_LIMIT)
    }
}

/// `φ_ZPF = sqrt(Z_a / 2 R_q)` with `Z_a = sqrt(L/C)`.
pub fn zero_point_phase(mode_inductance: f64, mode_capacitance: f64) -> f64 {
    let z = (mode_inductance / mode_capacitance).sqrt();
    (z / (2.0 * RESISTANCE_QUANTUM)).sqrt()
}

/// Signed self-Kerr `12 g4 / ħ` [rad/s] of the lumped mode.
pub fn lumped_kerr(model: &LumpedModel) -> f64 {
    let m = model.m();
    let e_j = REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / model.junction_inductance;
    let zpf = zero_point_phase(model.mode_inductance(), model.mode_capacitance());
    // Σ_junctions (E_J,i / 4!) δ_i^4 per unit φ^4, δ_i the phase drop per junction
    let quartic_per_phase4 = match model.scheme {
        ArrayingScheme::ScaledJunctions => m * (m * e_j) / 24.0 / m.powi(4),
        ArrayingScheme::FixedJunctions => m * e_j / 24.0 / m.powi(4),
        ArrayingScheme::SeriesInductance { .. } => {
            let p_j = model.junction_participation().unwrap_or_default();
            m * e_j / 24.0 * p_j.powi(4)
        }
    };
    // -cos expansion gives a negative quartic term
    -12.0 * quartic_per_phase4 * zpf.powi(4) / HBAR
}

#[cfg(test)]
mod tests {
    use super::*;

    const LJ: f64 = 48e-12;
    const C: f64 = 1.2e-12;

    fn kerr(scheme: ArrayingScheme, m: u32) -> f64 {
        lumped_kerr(&LumpedModel::new(scheme, m, LJ, C).unwrap())
    }

    #[test]
    fn zpf_unit_at_twice_resistance_quantum() {
        // Z = sqrt(L/C) = 2 R_q
        let z = 2.0 * RESISTANCE_QUANTUM;
        let c = 1e-13;
        assert!((zero_point_phase(z * z * c, c) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zpf_quadrupled_inductance() {
        let a = zero_point_phase(1e-9, 1e-13);
        let b = zero_point_phase(4e-9, 1e-13);
        assert!((b / a - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zpf_numeric_value() {
        // 1 nH, 100 fF: Z = 100 Ω, R_q = ħ/4e²
        assert!((zero_point_phase(1e-9, 100e-15) - 0.220_641_555_731_822_55).abs() < 1e-15);
    }

    #[test]
    fn scaling_ratios() {
        let series = ArrayingScheme::SeriesInductance { stray_inductance: 5e-9 };
        for m in [2u32, 7, 64] {
            let mf = m as f64;
            let r1 = kerr(ArrayingScheme::ScaledJunctions, m) / kerr(ArrayingScheme::ScaledJunctions, 1);
            let r2 = kerr(ArrayingScheme::FixedJunctions, m) / kerr(ArrayingScheme::FixedJunctions, 1);
            let r3 = kerr(series, m) / kerr(series, 1);
            assert!((r1 * mf * mf - 1.0).abs() < 1e-12);
            assert!((r2 * mf - 1.0).abs() < 1e-12);
            assert!((r3 / mf - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bare_junction_is_negative() {
        assert!(kerr(ArrayingScheme::ScaledJunctions, 1) < 0.0);
    }

    #[test]
    fn single_junction_kerr_matches_charging_energy() {
        // K = -E_C / ħ with E_C = e²/2C for a single weakly anharmonic junction
        let k = kerr(ArrayingScheme::ScaledJunctions, 1);
        let e_c = crate::constants::ELEMENTARY_CHARGE.powi(2) / (2.0 * C);
        assert!((k + e_c / HBAR).abs() / k.abs() < 1e-12);
    }

    #[test]
    fn scaled_junctions_frequency_independent_of_m() {
        let base = LumpedModel::new(ArrayingScheme::ScaledJunctions, 1, LJ, C).unwrap();
        for m in [2, 10, 64] {
            let model = LumpedModel::new(ArrayingScheme::ScaledJunctions, m, LJ, C).unwrap();
            assert!((model.resonance_frequency() / base.resonance_frequency() - 1.0).abs() < 1e-12);
            assert!((model.impedance() / base.impedance() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn series_validity_flag() {
        let s = ArrayingScheme::SeriesInductance { stray_inductance: 1e-9 };
        assert!(LumpedModel::new(s, 2, LJ, C).unwrap().within_validity());
        assert!(!LumpedModel::new(s, 3, LJ, C).unwrap().within_validity());
        assert!(LumpedModel::new(ArrayingScheme::FixedJunctions, 1000, LJ, C).unwrap().within_validity());
    }

    #[test]
    fn rejects_empty_array() {
        assert!(LumpedModel::new(ArrayingScheme::FixedJunctions, 0, LJ, C).is_err());
    }
}
