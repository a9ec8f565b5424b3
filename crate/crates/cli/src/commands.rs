//! Subcommand bodies. Each returns its output as text so that results are a
//! pure function of the inputs and can be written atomically.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use arraymode::kerr::self_kerr_numeric;
use arraymode::modes::{classify_region, derived_params, mode_profile, nth_mode, solve_modes};
use arraymode::noisecal::{
    bias_tee_correction, calibrate, db_to_linear, linear_to_db, nvr_to_noise_temp, DEFAULT_RESIDUAL_LIMIT,
};
use arraymode::planner::{default_flux_grid, DEFAULT_FLUX_POINTS};
use arraymode::{DeviceModel, FluxPlanner, FrequencySamples, ModeSolution};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::error::{CliError, Result};
use crate::table::{float, Table};

/// Upper edge of the default mode band [Hz].
pub const DEFAULT_BAND_TOP: f64 = 20e9;
/// Default band tops are kept below this fraction of the plasma frequency,
/// where the spectrum accumulates.
pub const DEFAULT_PLASMA_FRACTION: f64 = 0.9;

/// `(0, min(20 GHz, 0.9 f_p)]` for the given device [Hz].
pub fn default_band(device: &DeviceModel) -> Result<(f64, f64)> {
    let f_p = derived_params(&device.array)?.omega_p / TAU;
    Ok((0.0, DEFAULT_BAND_TOP.min(DEFAULT_PLASMA_FRACTION * f_p)))
}

fn rad(band: (f64, f64)) -> (f64, f64) {
    (TAU * band.0, TAU * band.1)
}

/// Integer array sizes log-spaced over `[lo, hi]`, duplicates removed.
pub fn log_spaced_sizes(lo: u32, hi: u32, count: usize) -> Result<Vec<u32>> {
    if lo == 0 || hi < lo || count == 0 {
        return Err(CliError::Usage(format!("invalid M range {lo}:{hi}:{count}; need 1 <= lo <= hi and count >= 1")));
    }
    if count == 1 || lo == hi {
        return Ok(vec![lo]);
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut sizes: Vec<u32> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u32)
        .map(|m| m.clamp(lo, hi))
        .collect();
    sizes.dedup();
    Ok(sizes)
}

fn kerr_hz(device: &DeviceModel, mode: &ModeSolution) -> Result<f64> {
    Ok(self_kerr_numeric(device, mode)?.kerr_hz())
}

/// One row per (M, mode): the array is resized and its leads re-sized so
/// the fundamental stays at `op_freq` until the critical size is reached.
pub fn sweep_m(config: &LoadedConfig, sizes: &[u32], band: Option<(f64, f64)>, op_freq: Option<f64>) -> Result<String> {
    let frequency = config.design_frequency(op_freq);
    let small = config.designed(1, frequency)?;
    let small_epr = mode_profile(&small, &nth_mode(&small, 1)?)?.epr;
    let band = match band {
        Some(b) => b,
        None => default_band(&small)?,
    };

    let blocks: Vec<Result<Vec<[String; 8]>>> = sizes
        .par_iter()
        .map(|&m| {
            let device = config.designed(m, frequency)?;
            let modes = solve_modes(&device, rad(band))?;
            let fundamental = match modes.iter().find(|s| s.n == 1) {
                Some(s) => s.epr,
                None => mode_profile(&device, &nth_mode(&device, 1)?)?.epr,
            };
            let region = classify_region(m, fundamental / m as f64, small_epr, device.resonator.arm_length);
            modes
                .iter()
                .map(|s| {
                    Ok([
                        m.to_string(),
                        float(device.resonator.arm_length),
                        s.n.to_string(),
                        float(s.omega / TAU),
                        float(kerr_hz(&device, s)?),
                        float(s.epr),
                        float(s.epr / m as f64),
                        region.label().to_string(),
                    ])
                })
                .collect()
        })
        .collect();

    let mut table = Table::new(&["M", "d_r_m", "mode_n", "freq_Hz", "kerr_Hz", "epr", "epr_per_cell", "region_label"]);
    for block in blocks {
        for row in block? {
            table.push(row);
        }
    }
    table.finish()
}

/// Modes of the configured device inside `band` [Hz].
pub fn modes(
    config: &LoadedConfig,
    flux: Option<f64>,
    band: Option<(f64, f64)>,
    op_freq: Option<f64>,
) -> Result<String> {
    let mut device = config.device(op_freq)?;
    if let Some(flux) = flux {
        device = device.with_flux(flux);
    }
    let band = match band {
        Some(b) => b,
        None => default_band(&device)?,
    };
    let solutions = solve_modes(&device, rad(band))?;
    let rows: Vec<Result<[String; 5]>> = solutions
        .par_iter()
        .map(|s| {
            Ok([
                s.n.to_string(),
                s.parity.as_str().to_string(),
                float(s.omega / TAU),
                float(s.epr),
                float(kerr_hz(&device, s)?),
            ])
        })
        .collect();
    let mut table = Table::new(&["n", "parity", "freq_Hz", "epr", "kerr_Hz"]);
    for row in rows {
        table.push(row?);
    }
    table.finish()
}

#[derive(Debug, Serialize)]
pub struct GapSummary {
    #[serde(rename = "band_Hz")]
    pub band_hz: [f64; 2],
    #[serde(rename = "step_Hz")]
    pub step_hz: f64,
    /// `null` for an unlimited tolerance.
    #[serde(rename = "tolerance_Hz")]
    pub tolerance_hz: Option<f64>,
    pub coverage_fraction: f64,
    #[serde(rename = "covered_width_Hz")]
    pub covered_width_hz: f64,
    #[serde(rename = "gap_width_Hz")]
    pub gap_width_hz: f64,
    #[serde(rename = "covered_Hz")]
    pub covered_hz: Vec<[f64; 2]>,
    #[serde(rename = "gaps_Hz")]
    pub gaps_hz: Vec<[f64; 2]>,
}

/// Flux-tuning coverage of `band` [Hz]: a per-target CSV and a JSON gap
/// summary.
pub fn flux_map(
    config: &LoadedConfig,
    band: (f64, f64),
    step: f64,
    tolerance: f64,
    flux_points: usize,
    op_freq: Option<f64>,
) -> Result<(String, String)> {
    if !(band.0.is_finite() && band.1.is_finite() && 0.0 < band.0 && band.0 <= band.1) {
        return Err(CliError::Usage(format!("invalid band {}:{}; need 0 < lo <= hi", band.0, band.1)));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Usage(format!("--step must be > 0, got {step}")));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(CliError::Usage(format!("--tolerance must be >= 0, got {tolerance}")));
    }
    let device = config.device(op_freq)?;
    let (lo, hi) = rad(band);
    let tol = TAU * tolerance;
    let planner = FluxPlanner::new(device, hi + tol.min(hi), &default_flux_grid(flux_points))?;
    let map = planner.coverage_map((lo, hi), TAU * step, tol)?;

    let mut table = Table::new(&["target_Hz", "covered", "flux_frac", "mode_n", "freq_Hz", "miss_Hz"]);
    for e in &map.entries {
        let row = match e.matched {
            Some(m) => [
                float(e.target / TAU),
                "true".into(),
                float(m.flux_frac),
                m.n.to_string(),
                float(m.omega / TAU),
                float(m.miss / TAU),
            ],
            None => [float(e.target / TAU), "false".into(), String::new(), String::new(), String::new(), String::new()],
        };
        table.push(row);
    }
    let hz = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| [a / TAU, b / TAU]).collect::<Vec<_>>();
    let summary = GapSummary {
        band_hz: [band.0, band.1],
        step_hz: step,
        tolerance_hz: tolerance.is_finite().then_some(tolerance),
        coverage_fraction: map.coverage_fraction(),
        covered_width_hz: map.covered.iter().map(|(a, b)| b - a).sum::<f64>() / TAU,
        gap_width_hz: map.gap_width() / TAU,
        covered_hz: hz(&map.covered),
        gaps_hz: hz(&map.gaps),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary is serializable") + "\n";
    Ok((table.finish()?, json))
}

/// Default flux grid size for `flux-map`.
pub const DEFAULT_MAP_FLUX_POINTS: usize = DEFAULT_FLUX_POINTS;

#[derive(Debug, Clone)]
pub struct NoiseFitOptions {
    /// Physical temperature of the tunnel junction [K].
    pub temperature: f64,
    /// Detection bandwidth [Hz].
    pub bandwidth: f64,
    /// Transmission of the element between junction and reference plane.
    pub eta: Option<f64>,
    /// Minimum |bias| entering the fit [V]; `None` uses the default.
    pub v_threshold: Option<f64>,
    pub residual_limit: f64,
}

impl NoiseFitOptions {
    pub fn new(temperature: f64, bandwidth: f64) -> Self {
        NoiseFitOptions { temperature, bandwidth, eta: None, v_threshold: None, residual_limit: DEFAULT_RESIDUAL_LIMIT }
    }
}

/// Per-frequency gain and system noise temperature from junction noise
/// sweeps; amplifier noise temperatures when NVR data are given. Returns
/// the CSV and warnings for frequencies whose fit was rejected.
pub fn noise_fit(samples: &Path, nvr: Option<&Path>, opts: &NoiseFitOptions) -> Result<(String, Vec<String>)> {
    let rows = crate::table::read_columns(samples, &["freq_Hz", "bias_V", "power_W"])?;
    let mut grouped: BTreeMap<u64, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
    for r in rows {
        grouped.entry(order_key(r[0])).or_insert_with(|| (r[0], Vec::new())).1.push((r[1], r[2]));
    }
    let by_omega: BTreeMap<u64, f64> = grouped.values().map(|(f, _)| (order_key(TAU * f), *f)).collect();
    let hz = |omega: f64| by_omega.get(&order_key(omega)).copied().unwrap_or(omega / TAU);
    let sweeps: Vec<FrequencySamples> =
        grouped.values().map(|(f, points)| FrequencySamples { omega: TAU * f, points: points.clone() }).collect();

    let nvr_table: BTreeMap<u64, (f64, f64)> = match nvr {
        Some(path) => crate::table::read_columns(path, &["freq_Hz", "NVR", "gain_dB"])?
            .into_iter()
            .map(|r| (order_key(r[0]), (r[1], r[2])))
            .collect(),
        None => BTreeMap::new(),
    };

    let (cal, rejected) = calibrate(&sweeps, opts.temperature, opts.bandwidth, opts.v_threshold, opts.residual_limit)?;
    let warnings: Vec<String> =
        rejected.iter().map(|(omega, e)| format!("{} Hz: fit rejected: {e}", float(hz(*omega)))).collect();
    if cal.records.is_empty() {
        return Err(match rejected.into_iter().next() {
            Some((_, e)) => CliError::Model(e),
            None => CliError::Usage(format!("{}: no data rows", samples.display())),
        });
    }

    let mut table = Table::new(&["freq_Hz", "G_sys_dB", "T_sys_K", "T_N_K", "residual"]);
    for rec in &cal.records {
        let f = hz(rec.omega);
        let (gain, t_sys) = match opts.eta {
            Some(eta) => bias_tee_correction(rec.gain, rec.t_sys, eta, rec.omega)?,
            None => (rec.gain, rec.t_sys),
        };
        let t_n = match nvr_table.get(&order_key(f)) {
            Some(&(ratio, gain_db)) => float(nvr_to_noise_temp(ratio, db_to_linear(gain_db), t_sys, rec.omega)?),
            None => String::new(),
        };
        table.push([float(f), float(linear_to_db(gain)), float(t_sys), t_n, float(rec.residual)]);
    }
    Ok((table.finish()?, warnings))
}

/// Bit pattern ordering finite floats like their values.
fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}
