//! The SNAIL element: one small junction (ratio `alpha`) in a loop with three
//! large junctions, threaded by an external flux.
//!
//! Energies are in units of the large-junction Josephson energy
//! `E_J = φ0² / L_J`, phases in radians, and flux as the fraction Φ/Φ0.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::REDUCED_FLUX_QUANTUM;
use crate::error::{check_positive, Error, Result};
use crate::roots::{brent, Tolerance};

/// Number of large junctions in the loop.
const LARGE_JUNCTIONS: f64 = 3.0;

/// Samples per potential period used to detect a second well.
const WELL_SCAN_SAMPLES: usize = 3072;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnailSpec {
    /// Small-to-large junction inductance ratio, 0 < alpha < 1.
    pub alpha: f64,
    /// Inductance of one large junction [H].
    pub junction_inductance: f64,
}

impl SnailSpec {
    pub fn new(alpha: f64, junction_inductance: f64) -> Result<Self> {
        let spec = SnailSpec { alpha, junction_inductance };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds the element whose zero-flux linear inductance is
    /// `linear_inductance`, i.e. `L_J = c2(0) · L_S` with `c2(0) = alpha + 1/3`.
    pub fn from_linear_inductance(alpha: f64, linear_inductance: f64) -> Result<Self> {
        check_positive("linear_inductance", linear_inductance)?;
        Self::new(alpha, (alpha + 1.0 / LARGE_JUNCTIONS) * linear_inductance)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in (0, 1), got {}", self.alpha),
            });
        }
        check_positive("junction_inductance", self.junction_inductance)
    }

    /// Josephson energy of a large junction [J].
    pub fn josephson_energy(&self) -> f64 {
        REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / self.junction_inductance
    }
}

/// Taylor expansion of the potential around its minimum at a given flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnailExpansion {
    pub flux_frac: f64,
    /// Location of the minimum [rad], continuous in flux.
    pub phi_min: f64,
    /// `c_2, c_3, ..., c_max` (dimensionless).
    pub coefficients: Vec<f64>,
    /// `L_J / c_2` [H].
    pub linear_inductance: f64,
}

impl SnailExpansion {
    /// Coefficient `c_order`; panics if `order` was not computed.
    pub fn c(&self, order: usize) -> f64 {
        assert!(order >= 2, "expansion starts at second order");
        self.coefficients[order - 2]
    }

    pub fn max_order(&self) -> usize {
        self.coefficients.len() + 1
    }
}

/// `U_S(φ) / E_J = -[alpha cos φ + 3 cos((φ_ext - φ)/3)]` with `φ_ext = 2π·flux_frac`.
pub fn snail_potential(spec: &SnailSpec, phi: f64, flux_frac: f64) -> f64 {
    potential_derivative(spec, phi, flux_frac, 0)
}

/// `cos(x + n·π/2)` without accumulating a rounded multiple of π/2.
fn cos_shifted(x: f64, n: usize) -> f64 {
    match n % 4 {
        0 => x.cos(),
        1 => -x.sin(),
        2 => -x.cos(),
        _ => x.sin(),
    }
}

/// Exact `order`-th derivative of `U_S / E_J` with respect to φ.
pub fn potential_derivative(spec: &SnailSpec, phi: f64, flux_frac: f64, order: usize) -> f64 {
    let theta = (TAU * flux_frac - phi) / LARGE_JUNCTIONS;
    let chain = (-1.0 / LARGE_JUNCTIONS).powi(order as i32);
    -spec.alpha * cos_shifted(phi, order) - LARGE_JUNCTIONS * chain * cos_shifted(theta, order)
}

/// Location of the potential minimum [rad].
///
/// The flux is reduced to `[-1/2, 1/2]`, where the minimum is bracketed by
/// `0` and `φ_ext` and found by bracketed root finding on `U_S'`; the result
/// is then unwound by `2π` per flux quantum so it is continuous in flux.
pub fn find_minimum(spec: &SnailSpec, flux_frac: f64) -> Result<f64> {
    spec.validate()?;
    if !flux_frac.is_finite() {
        return Err(Error::InvalidParameter { name: "flux_frac", reason: format!("must be finite, got {flux_frac}") });
    }
    let winding = flux_frac.round();
    let reduced = flux_frac - winding;
    let phi_ext = TAU * reduced;

    let no_min = |reason: String| Error::NoMinimum { alpha: spec.alpha, flux_frac, reason };

    let phi0 = if phi_ext == 0.0 {
        0.0
    } else {
        let (lo, hi) = if phi_ext > 0.0 { (0.0, phi_ext) } else { (phi_ext, 0.0) };
        let slope = |p: f64| potential_derivative(spec, p, reduced, 1);
        brent(slope, lo, hi, Tolerance::default()).map_err(|e| no_min(e.to_string()))?
    };

    let curvature = potential_derivative(spec, phi0, reduced, 2);
    if curvature <= 0.0 {
        return Err(no_min(format!("curvature {curvature:.3e} at the stationary point")));
    }
    let wells = count_minima(spec, reduced, phi_ext);
    if wells != 1 {
        return Err(no_min(format!("{wells} wells per period")));
    }
    Ok(phi0 + TAU * winding)
}

/// Counts local minima over one full period (6π in φ) of the potential.
fn count_minima(spec: &SnailSpec, flux_frac: f64, phi_ext: f64) -> usize {
    let period = 2.0 * LARGE_JUNCTIONS * PI;
    let start = phi_ext - 0.5 * period;
    let step = period / WELL_SCAN_SAMPLES as f64;
    let slope = |k: usize| potential_derivative(spec, start + step * k as f64, flux_frac, 1);
    let mut prev = slope(0);
    let mut count = 0;
    for k in 1..=WELL_SCAN_SAMPLES {
        let cur = slope(k);
        if prev < 0.0 && cur >= 0.0 {
            count += 1;
        }
        prev = cur;
    }
    count
}

/// Expansion coefficients `c_n = (1/E_J) dⁿU_S/dφⁿ` at the minimum, for
/// `2 ≤ n ≤ max_order`.
pub fn taylor_coefficients(spec: &SnailSpec, flux_frac: f64, max_order: usize) -> Result<SnailExpansion> {
    if max_order < 2 {
        return Err(Error::InvalidParameter {
            name: "max_order",
            reason: format!("must be at least 2, got {max_order}"),
        });
    }
    let phi_min = find_minimum(spec, flux_frac)?;
    let coefficients: Vec<f64> = (2..=max_order).map(|n| potential_derivative(spec, phi_min, flux_frac, n)).collect();
    let c2 = coefficients[0];
    if c2 <= 0.0 {
        return Err(Error::ExpansionFailure { c2 });
    }
    Ok(SnailExpansion { flux_frac, phi_min, linear_inductance: spec.junction_inductance / c2, coefficients })
}
