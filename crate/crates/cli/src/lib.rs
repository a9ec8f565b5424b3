//! Command-line front end: loads device descriptions, runs mode, Kerr,
//! flux-coverage and noise-calibration analyses and writes CSV/JSON data.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::NoiseFitOptions;
use crate::config::DeviceConfig;
pub use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "arraymode", version, about = "Mode, Kerr and flux-coverage analysis of SNAIL-array resonators")]
pub struct Cli {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for independent sweep points (1 disables parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Modes, Kerr and participation versus array size at a fixed design frequency.
    SweepM(SweepArgs),
    /// Modes of one device in a frequency band.
    Modes(ModesArgs),
    /// Flux-tuning coverage of a band: per-target CSV plus JSON gap summary.
    FluxMap(FluxMapArgs),
    /// Gain and noise temperature from tunnel-junction noise sweeps.
    NoiseFit(NoiseFitArgs),
}

#[derive(Debug, Args)]
pub struct DeviceArgs {
    /// Device description (JSON).
    #[arg(long)]
    pub config: PathBuf,

    /// Frequency the leads are sized for [Hz]; overrides the config.
    #[arg(long)]
    pub op_freq: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub device: DeviceArgs,

    /// Array sizes `lo:hi:count`, log-spaced and rounded.
    #[arg(long, value_parser = parse_m_range)]
    pub m_range: (u32, u32, usize),

    /// Mode band `lo:hi` [Hz]; default `0:min(20 GHz, 0.9 f_p)`.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub device: DeviceArgs,

    /// Flux bias [Φ0]; overrides the config.
    #[arg(long)]
    pub flux: Option<f64>,

    /// Mode band `lo:hi` [Hz]; default `0:min(20 GHz, 0.9 f_p)`.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct FluxMapArgs {
    #[command(flatten)]
    pub device: DeviceArgs,

    /// Target band `lo:hi` [Hz].
    #[arg(long, value_parser = parse_band, default_value = "4e9:12e9")]
    pub band: (f64, f64),

    /// Target spacing [Hz].
    #[arg(long, default_value_t = 10e6)]
    pub step: f64,

    /// Largest accepted frequency miss [Hz]; `inf` accepts any.
    #[arg(long, default_value_t = 10e6)]
    pub tolerance: f64,

    /// Flux grid points on [0, 0.49] Φ0.
    #[arg(long, default_value_t = commands::DEFAULT_MAP_FLUX_POINTS)]
    pub flux_points: usize,

    /// Gap summary file; next to `--out` with a `.json` extension, or
    /// standard error, when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseFitArgs {
    /// Samples with columns `freq_Hz`, `bias_V`, `power_W`.
    #[arg(long)]
    pub samples: PathBuf,

    /// Junction temperature [K].
    #[arg(long)]
    pub temperature: f64,

    /// Detection bandwidth [Hz].
    #[arg(long)]
    pub bandwidth: f64,

    /// Transmission between junction and reference plane, in (0, 1].
    #[arg(long)]
    pub eta: Option<f64>,

    /// Smallest |bias| entering the fit [V]; default
    /// `10 max(ħω, k_B T) / e`.
    #[arg(long)]
    pub v_threshold: Option<f64>,

    /// Largest accepted relative RMS fit residual.
    #[arg(long, default_value_t = arraymode::noisecal::DEFAULT_RESIDUAL_LIMIT)]
    pub residual_limit: f64,

    /// Pump-on/off noise ratios with columns `freq_Hz`, `NVR`, `gain_dB`.
    #[arg(long)]
    pub nvr: Option<PathBuf>,
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

fn parse_m_range(s: &str) -> std::result::Result<(u32, u32, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(format!("expected lo:hi:count, got {s:?}"));
    };
    let int = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
    Ok((int(lo)?, int(hi)?, int(count)? as usize))
}

fn load(args: &DeviceArgs) -> Result<config::LoadedConfig> {
    let loaded = DeviceConfig::load(&args.config)?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {w}", args.config.display());
    }
    Ok(loaded)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::SweepM(a) => {
            let loaded = load(&a.device)?;
            let sizes = commands::log_spaced_sizes(a.m_range.0, a.m_range.1, a.m_range.2)?;
            emit(out, &commands::sweep_m(&loaded, &sizes, a.band, a.device.op_freq)?)
        }
        Command::Modes(a) => {
            let loaded = load(&a.device)?;
            emit(out, &commands::modes(&loaded, a.flux, a.band, a.device.op_freq)?)
        }
        Command::FluxMap(a) => {
            let loaded = load(&a.device)?;
            let (csv, json) =
                commands::flux_map(&loaded, a.band, a.step, a.tolerance, a.flux_points, a.device.op_freq)?;
            emit(out, &csv)?;
            match (&a.summary, out) {
                (Some(path), _) => emit(Some(path), &json),
                (None, Some(out)) => emit(Some(&out.with_extension("json")), &json),
                (None, None) => {
                    eprint!("{json}");
                    Ok(())
                }
            }
        }
        Command::NoiseFit(a) => {
            let opts = NoiseFitOptions {
                temperature: a.temperature,
                bandwidth: a.bandwidth,
                eta: a.eta,
                v_threshold: a.v_threshold,
                residual_limit: a.residual_limit,
            };
            let (csv, warnings) = commands::noise_fit(&a.samples, a.nvr.as_deref(), &opts)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            emit(out, &csv)
        }
    }
}
