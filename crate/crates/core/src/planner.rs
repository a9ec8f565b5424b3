//! Flux-tuning analysis: mode branches versus flux, matching an operating
//! frequency to a (flux, mode) pair, and band coverage maps.
//!
//! Flux is swept over `[0, 1/2 − guard]`; the spectrum is even in flux so
//! negative fluxes mirror these. Modes never cross in this model, so the
//! global mode index identifies a branch across the sweep.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::modes::{derived_params, mode_frequencies, nth_mode, DeviceModel, ModeFrequency};
use crate::roots::{brent_with_values, Tolerance};

/// Distance kept from half flux, where the potential may develop a second well.
pub const HALF_FLUX_GUARD: f64 = 0.01;

/// Default number of flux grid points on `[0, 1/2 − guard]`.
pub const DEFAULT_FLUX_POINTS: usize = 33;

/// Fraction of the plasma frequency above which flux sweeps do not resolve
/// modes.
pub const PLASMA_CAP: f64 = 0.99;

/// Default match tolerance [rad/s] (10 MHz).
pub const DEFAULT_TOLERANCE: f64 = 2.0 * PI * 10e6;

/// Uniform flux grid on `[0, 1/2 − guard]`.
pub fn default_flux_grid(points: usize) -> Vec<f64> {
    let top = 0.5 - HALF_FLUX_GUARD;
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| top * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Modes at one flux point; failures are kept so the sweep stays partial.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxPoint {
    pub flux_frac: f64,
    pub modes: std::result::Result<Vec<ModeFrequency>, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxSweep {
    /// Upper band edge of every per-flux solve [rad/s].
    pub band: (f64, f64),
    pub points: Vec<FluxPoint>,
}

impl FluxSweep {
    /// `ω_n` along the grid; `None` where the mode lies outside the band or
    /// the solve failed.
    pub fn branch(&self, n: usize) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.modes.as_ref().ok().and_then(|m| m.iter().find(|m| m.n == n)).map(|m| m.omega))
            .collect()
    }

    /// Highest mode index seen anywhere on the grid.
    pub fn max_index(&self) -> usize {
        self.points.iter().filter_map(|p| p.modes.as_ref().ok()).flat_map(|m| m.iter().map(|m| m.n)).max().unwrap_or(0)
    }
}

/// Solves the modes in `band` at each flux; grid order is preserved. The
/// upper edge is capped at [`PLASMA_CAP`] times the plasma frequency at that
/// flux, where the spectrum accumulates.
pub fn flux_sweep(device: &DeviceModel, fluxes: &[f64], band: (f64, f64)) -> FluxSweep {
    let points = fluxes
        .par_iter()
        .map(|&flux_frac| {
            let tuned = device.with_flux(flux_frac);
            let modes = derived_params(&tuned.array)
                .and_then(|p| mode_frequencies(&tuned, (band.0, band.1.min(PLASMA_CAP * p.omega_p))));
            FluxPoint { flux_frac, modes }
        })
        .collect();
    FluxSweep { band, points }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxMatch {
    pub flux_frac: f64,
    pub n: usize,
    /// Achieved mode frequency [rad/s].
    pub omega: f64,
    /// `|ω_n − ω_op|` [rad/s].
    pub miss: f64,
}

fn by_quality(a: &FluxMatch, b: &FluxMatch) -> Ordering {
    a.miss.total_cmp(&b.miss).then(a.flux_frac.total_cmp(&b.flux_frac)).then(a.n.cmp(&b.n))
}

/// A device together with its precomputed flux sweep up to `omega_max`.
#[derive(Debug, Clone)]
pub struct FluxPlanner {
    pub device: DeviceModel,
    pub sweep: FluxSweep,
}

impl FluxPlanner {
    pub fn new(device: DeviceModel, omega_max: f64, fluxes: &[f64]) -> Result<Self> {
        check_positive("omega_max", omega_max)?;
        if fluxes.is_empty() {
            return Err(Error::InvalidParameter { name: "fluxes", reason: "empty flux grid".into() });
        }
        if let Some(bad) = fluxes.iter().find(|f| !(0.0..0.5).contains(*f)) {
            return Err(Error::InvalidParameter { name: "fluxes", reason: format!("flux {bad} outside [0, 1/2)") });
        }
        let sweep = flux_sweep(&device, fluxes, (0.0, omega_max));
        Ok(FluxPlanner { device, sweep })
    }

    pub fn with_default_grid(device: DeviceModel, omega_max: f64) -> Result<Self> {
        Self::new(device, omega_max, &default_flux_grid(DEFAULT_FLUX_POINTS))
    }

    /// Best (flux, mode) for `omega_op`: exact crossings refined by root
    /// solving in flux along each branch, otherwise the closest grid point.
    /// `None` when the best miss exceeds `tolerance`.
    pub fn match_target(&self, omega_op: f64, tolerance: f64) -> Option<FluxMatch> {
        let fluxes: Vec<f64> = self.sweep.points.iter().map(|p| p.flux_frac).collect();
        let mut best: Option<FluxMatch> = None;
        let mut offer = |m: FluxMatch| {
            if best.as_ref().is_none_or(|b| by_quality(&m, b) == Ordering::Less) {
                best = Some(m);
            }
        };
        for n in 1..=self.sweep.max_index() {
            let branch = self.sweep.branch(n);
            // signed misses; a mode absent from a solved point lies above the band
            let misses: Vec<f64> = branch
                .iter()
                .zip(&self.sweep.points)
                .map(|(w, p)| match (w, &p.modes) {
                    (Some(w), _) => w - omega_op,
                    (None, Ok(_)) => f64::INFINITY,
                    (None, Err(_)) => f64::NAN,
                })
                .collect();
            for (i, w) in branch.iter().enumerate() {
                if let Some(w) = w {
                    offer(FluxMatch { flux_frac: fluxes[i], n, omega: *w, miss: (w - omega_op).abs() });
                }
            }
            for i in 0..misses.len().saturating_sub(1) {
                let (ga, gb) = (misses[i], misses[i + 1]);
                if ga.is_nan() || gb.is_nan() || (ga < 0.0) == (gb < 0.0) {
                    continue;
                }
                if let Some(m) = self.refine(n, fluxes[i], fluxes[i + 1], ga, gb, omega_op) {
                    offer(m);
                }
            }
        }
        best.filter(|m| m.miss <= tolerance)
    }

    fn refine(&self, n: usize, fa: f64, fb: f64, ga: f64, gb: f64, omega_op: f64) -> Option<FluxMatch> {
        let g = |flux: f64| nth_mode(&self.device.with_flux(flux), n).map(|m| m.omega - omega_op).unwrap_or(f64::NAN);
        // replace an open (above-band) endpoint by a direct evaluation
        let ga = if ga.is_finite() { ga } else { g(fa) };
        let gb = if gb.is_finite() { gb } else { g(fb) };
        let tol = Tolerance { abs: 1e-13, ..Tolerance::default() };
        let flux = brent_with_values(g, fa, fb, ga, gb, tol).ok()?;
        let mode = nth_mode(&self.device.with_flux(flux), n).ok()?;
        Some(FluxMatch { flux_frac: flux, n, omega: mode.omega, miss: (mode.omega - omega_op).abs() })
    }

    /// Runs [`Self::match_target`] on `lo, lo + step, ...` up to `hi` and
    /// aggregates the misses into gaps.
    pub fn coverage_map(&self, band: (f64, f64), step: f64, tolerance: f64) -> Result<CoverageMap> {
        check_positive("step", step)?;
        let (lo, hi) = band;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter { name: "band", reason: format!("invalid band {lo}..{hi}") });
        }
        if tolerance.is_nan() || tolerance < 0.0 {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: format!("must be >= 0, got {tolerance}"),
            });
        }
        let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
        let entries: Vec<CoverageEntry> = (0..count)
            .into_par_iter()
            .map(|k| {
                let target = lo + k as f64 * step;
                CoverageEntry { target, matched: self.match_target(target, tolerance) }
            })
            .collect();

        let mut covered: Vec<(f64, f64)> = Vec::new();
        let mut gaps: Vec<(f64, f64)> = Vec::new();
        // shared edges are computed once so neighbouring cells meet exactly
        let edge = |k: usize| (lo + (k as f64 - 0.5) * step).clamp(lo, hi);
        for (k, e) in entries.iter().enumerate() {
            let cell = (edge(k), if k + 1 == count { hi } else { edge(k + 1) });
            let list = if e.matched.is_some() { &mut covered } else { &mut gaps };
            match list.last_mut() {
                Some(last) if last.1 == cell.0 => last.1 = cell.1,
                _ => list.push(cell),
            }
        }
        Ok(CoverageMap { band, step, tolerance, entries, covered, gaps })
    }
}

/// One-off [`FluxPlanner::match_target`] on the default grid, considering
/// modes up to `ω_op` plus the tolerance (capped at `2 ω_op`).
pub fn match_target(device: &DeviceModel, omega_op: f64, tolerance: f64) -> Result<Option<FluxMatch>> {
    let planner = FluxPlanner::with_default_grid(*device, omega_op + tolerance.min(omega_op))?;
    Ok(planner.match_target(omega_op, tolerance))
}

/// One-off [`FluxPlanner::coverage_map`] on the default grid.
pub fn coverage_map(device: &DeviceModel, band: (f64, f64), step: f64, tolerance: f64) -> Result<CoverageMap> {
    let planner = FluxPlanner::with_default_grid(*device, band.1 + tolerance.min(band.1))?;
    planner.coverage_map(band, step, tolerance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub target: f64,
    pub matched: Option<FluxMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageMap {
    pub band: (f64, f64),
    pub step: f64,
    pub tolerance: f64,
    pub entries: Vec<CoverageEntry>,
    /// Merged cells `[target ± step/2] ∩ band` of matched targets.
    pub covered: Vec<(f64, f64)>,
    /// Merged cells of unmatched targets.
    pub gaps: Vec<(f64, f64)>,
}

impl CoverageMap {
    /// Covered width over band width.
    pub fn coverage_fraction(&self) -> f64 {
        let width = self.band.1 - self.band.0;
        if width <= 0.0 {
            return if self.gaps.is_empty() { 1.0 } else { 0.0 };
        }
        self.covered.iter().map(|(a, b)| b - a).sum::<f64>() / width
    }

    pub fn gap_width(&self) -> f64 {
        self.gaps.iter().map(|(a, b)| b - a).sum()
    }
}

/// Coupling rate `κ = Δω · 2R / (π Z_S)` of a mode coupled to a port of
/// resistance `R` through an array section of impedance `Z_S`.
pub fn estimate_kappa(z_s: f64, mode_spacing: f64, r: f64) -> Result<f64> {
    check_positive("z_s", z_s)?;
    check_positive("mode_spacing", mode_spacing)?;
    check_positive("r", r)?;
    Ok(mode_spacing * 2.0 * r / (PI * z_s))
}
