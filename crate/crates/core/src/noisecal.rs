//! Shot-noise tunnel junction calibration: forward noise model, linear
//! extraction of system gain and noise temperature, noise-visibility-ratio
//! inversion and bias-tee loss correction.
//!
//! Temperatures in kelvin, powers in watts, `B` in hertz, `ω` in rad/s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{quantum_noise_temperature, BOLTZMANN, ELEMENTARY_CHARGE, HBAR};
use crate::error::{check_positive, Error, Result};

/// Default acceptance limit on the relative RMS fit residual.
pub const DEFAULT_RESIDUAL_LIMIT: f64 = 0.01;

/// `x coth(x / T)`, continuous through `x = 0` where it equals `T`.
fn x_coth(x: f64, t: f64) -> f64 {
    let u = x / t;
    if u.abs() < 1e-6 {
        t * (1.0 + u * u / 3.0)
    } else {
        x / u.tanh()
    }
}

/// Output noise power of a biased tunnel junction seen through a chain of
/// gain `G_sys` and noise temperature `T_sys`:
///
/// `P = G k_B B [T_sys + ½ x₊ coth(x₊/T) + ½ x₋ coth(x₋/T)]`,
/// `x± = (eV ± ħω) / 2k_B`.
pub fn sntj_noise_power(gain: f64, t_sys: f64, t: f64, v: f64, b: f64, omega: f64) -> Result<f64> {
    check_positive("temperature", t)?;
    check_positive("bandwidth", b)?;
    let ev = ELEMENTARY_CHARGE * v;
    let hw = HBAR * omega;
    let x_plus = (ev + hw) / (2.0 * BOLTZMANN);
    let x_minus = (ev - hw) / (2.0 * BOLTZMANN);
    Ok(gain * BOLTZMANN * b * (t_sys + 0.5 * x_coth(x_plus, t) + 0.5 * x_coth(x_minus, t)))
}

/// `|V|` above which the high-voltage limit is used:
/// `e|V| = 10 max(ħω, k_B T)`.
pub fn default_bias_threshold(omega: f64, t: f64) -> f64 {
    10.0 * (HBAR * omega).max(BOLTZMANN * t) / ELEMENTARY_CHARGE
}

/// Bias sweep at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySamples {
    /// [rad/s]
    pub omega: f64,
    /// `(V, P_N)` pairs.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    /// [rad/s]
    pub omega: f64,
    /// Linear power gain.
    pub gain: f64,
    /// [K]
    pub t_sys: f64,
    /// RMS of the fit residuals relative to the mean fitted power.
    pub residual: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCalibration {
    pub records: Vec<CalibrationRecord>,
    /// Junction temperature [K].
    pub temperature: f64,
    /// Resolution bandwidth [Hz].
    pub bandwidth: f64,
}

fn distinct_count(mut values: Vec<f64>) -> usize {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.len()
}

/// Least-squares line `P = slope |V| + intercept` over `|V| ≥ threshold`,
/// pooling both bias signs. `threshold = None` uses
/// [`default_bias_threshold`].
pub fn fit_system_noise(
    samples: &FrequencySamples,
    t: f64,
    b: f64,
    threshold: Option<f64>,
) -> Result<CalibrationRecord> {
    check_positive("temperature", t)?;
    check_positive("bandwidth", b)?;
    let threshold = threshold.unwrap_or_else(|| default_bias_threshold(samples.omega, t));
    let used: Vec<(f64, f64)> = samples
        .points
        .iter()
        .filter(|(v, p)| v.is_finite() && p.is_finite() && v.abs() >= threshold)
        .copied()
        .collect();
    let positive = distinct_count(used.iter().filter(|(v, _)| *v > 0.0).map(|(v, _)| *v).collect());
    let negative = distinct_count(used.iter().filter(|(v, _)| *v < 0.0).map(|(v, _)| *v).collect());
    if positive < 2 || negative < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 distinct bias values of each sign above {threshold:.3e} V, have {positive} positive and {negative} negative"
        )));
    }

    let n = used.len() as f64;
    let mean_v = used.iter().map(|(v, _)| v.abs()).sum::<f64>() / n;
    let mean_p = used.iter().map(|(_, p)| p).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|(v, _)| (v.abs() - mean_v).powi(2)).sum();
    let sxy: f64 = used.iter().map(|(v, p)| (v.abs() - mean_v) * (p - mean_p)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all retained biases have the same magnitude".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_p - slope * mean_v;
    let rms = (used.iter().map(|(v, p)| (p - slope * v.abs() - intercept).powi(2)).sum::<f64>() / n).sqrt();

    // slope = G B e / 2, intercept = G k_B B T_sys
    let gain = 2.0 * slope / (b * ELEMENTARY_CHARGE);
    if !(gain > 0.0) {
        return Err(Error::NegativeGain { gain });
    }
    let t_sys = intercept / (gain * BOLTZMANN * b);
    if !(t_sys > 0.0) {
        return Err(Error::NonphysicalResult(format!("fitted T_sys = {t_sys:.6e} K is not positive")));
    }
    Ok(CalibrationRecord { omega: samples.omega, gain, t_sys, residual: rms / mean_p.abs(), points_used: used.len() })
}

/// Fits every frequency independently. Records failing the fit or whose
/// residual exceeds `residual_limit` are returned separately.
pub fn calibrate(
    sweeps: &[FrequencySamples],
    t: f64,
    b: f64,
    threshold: Option<f64>,
    residual_limit: f64,
) -> Result<(NoiseCalibration, Vec<(f64, Error)>)> {
    check_positive("temperature", t)?;
    check_positive("bandwidth", b)?;
    let fits: Vec<(f64, Result<CalibrationRecord>)> = sweeps
        .par_iter()
        .map(|s| {
            let fit = fit_system_noise(s, t, b, threshold).and_then(|r| {
                if r.residual < residual_limit {
                    Ok(r)
                } else {
                    Err(Error::InsufficientData(format!(
                        "fit residual {:.3e} exceeds limit {residual_limit:.3e}",
                        r.residual
                    )))
                }
            });
            (s.omega, fit)
        })
        .collect();
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (omega, fit) in fits {
        match fit {
            Ok(r) => records.push(r),
            Err(e) => rejected.push((omega, e)),
        }
    }
    Ok((NoiseCalibration { records, temperature: t, bandwidth: b }, rejected))
}

/// `NVR = [T_sys + G (T_Q + T_N)] / (T_sys + T_Q)`.
pub fn noise_visibility_ratio(t_n: f64, gain: f64, t_sys: f64, omega: f64) -> f64 {
    let t_q = quantum_noise_temperature(omega);
    (t_sys + gain * (t_q + t_n)) / (t_sys + t_q)
}

/// Inverts [`noise_visibility_ratio`] for the amplifier noise temperature.
pub fn nvr_to_noise_temp(nvr: f64, gain: f64, t_sys: f64, omega: f64) -> Result<f64> {
    check_positive("gain", gain)?;
    if !nvr.is_finite() {
        return Err(Error::InvalidParameter { name: "nvr", reason: format!("must be finite, got {nvr}") });
    }
    let t_q = quantum_noise_temperature(omega);
    let t_n = (nvr * (t_sys + t_q) - t_sys) / gain - t_q;
    let scale = (t_sys.abs() + t_q) / gain + t_q;
    if t_n < -1e-12 * scale {
        return Err(Error::NonphysicalResult(format!("inferred T_N = {t_n:.6e} K is negative")));
    }
    Ok(t_n)
}

/// Refers a calibration through a lossy element of transmission `η`:
/// `G' = η G`, `T' = T/η + ((1 − η)/η) T_Q`.
pub fn bias_tee_correction(gain: f64, t_sys: f64, eta: f64, omega: f64) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter { name: "eta", reason: format!("must lie in (0, 1], got {eta}") });
    }
    let t_q = quantum_noise_temperature(omega);
    Ok((eta * gain, t_sys / eta + (1.0 - eta) / eta * t_q))
}

/// Fractional systematic uncertainties of `T_sys` from the calibration
/// chain, e.g. junction impedance mismatch and the bias voltage divider.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Systematics {
    pub impedance_mismatch: f64,
    pub voltage_divider: f64,
}

impl Systematics {
    /// Combined fractional uncertainty (independent, in quadrature).
    pub fn combined(&self) -> f64 {
        self.impedance_mismatch.hypot(self.voltage_divider)
    }
}

/// Standard uncertainty of `T_N` propagated linearly from `T_sys`:
/// `σ = |∂T_N/∂T_sys| · δ T_sys = |NVR − 1| / G · δ T_sys`.
pub fn noise_temp_uncertainty(nvr: f64, gain: f64, t_sys: f64, systematics: &Systematics) -> Result<f64> {
    check_positive("gain", gain)?;
    Ok((nvr - 1.0).abs() / gain * t_sys * systematics.combined())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
