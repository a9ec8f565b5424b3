use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arraymode::modes::derived_params;
use arraymode::noisecal::{linear_to_db, noise_visibility_ratio, sntj_noise_power};
use arraymode_cli::config::DeviceConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arraymode"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> String {
    root().join("configs").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let (header, rows) = rows(csv);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.into_iter().map(|r| r[i].clone()).collect()
}

fn numbers(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|v| v.parse().unwrap()).collect()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn sweep_is_deterministic_across_runs_and_thread_counts() {
    let args = ["sweep-m", "--config", &config("snail-array-8ghz.json"), "--m-range", "2:2000:9", "--band", "0:12e9"];
    let first = stdout_ok(&args);
    assert_eq!(first, stdout_ok(&args));
    let mut serial = args.to_vec();
    serial.extend(["--threads", "1"]);
    assert_eq!(first, stdout_ok(&serial));
}

#[test]
fn fundamental_holds_design_frequency_below_critical_size() {
    let csv = stdout_ok(&[
        "sweep-m",
        "--config",
        &config("snail-array-8ghz.json"),
        "--m-range",
        "2:2000:15",
        "--band",
        "0:12e9",
    ]);
    let (header, table) = rows(&csv);
    assert_eq!(header, ["M", "d_r_m", "mode_n", "freq_Hz", "kerr_Hz", "epr", "epr_per_cell", "region_label"]);
    let fundamentals: Vec<(u32, f64, String)> = table
        .iter()
        .filter(|r| r[2] == "1")
        .map(|r| (r[0].parse().unwrap(), r[3].parse().unwrap(), r[7].clone()))
        .collect();
    assert_eq!(fundamentals.len(), 15);
    let mut previous = f64::INFINITY;
    for (m, f, region) in &fundamentals {
        if *m < 220 {
            assert!((f / 8e9 - 1.0).abs() < 1e-9, "M={m}: {f}");
            assert_ne!(region, "IV");
        } else {
            assert!(*f < previous && *f < 8e9, "M={m}: {f}");
            assert_eq!(region, "IV");
        }
        previous = *f;
    }
    // rows are ordered by M, then by mode index
    let keys: Vec<(u32, usize)> = table.iter().map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn single_size_sweep_matches_modes() {
    let cfg = config("snail-array-8ghz.json");
    let sweep = stdout_ok(&["sweep-m", "--config", &cfg, "--m-range", "200:200:1", "--band", "0:20e9"]);
    let modes = stdout_ok(&["modes", "--config", &cfg, "--band", "0:20e9"]);
    assert!(column(&sweep, "M").iter().all(|m| m == "200"));
    assert_eq!(column(&sweep, "mode_n"), column(&modes, "n"));
    for name in ["freq_Hz", "epr", "kerr_Hz"] {
        assert_eq!(column(&sweep, name), column(&modes, name), "{name}");
    }
}

#[test]
fn short_array_has_one_mode_in_band() {
    let csv = stdout_ok(&["modes", "--config", &config("snail-array-m20.json"), "--band", "4e9:12e9"]);
    assert_eq!(column(&csv, "n"), ["1"]);
    assert_eq!(column(&csv, "parity"), ["odd"]);
}

#[test]
fn long_array_low_modes_are_evenly_spaced() {
    let cfg = config("snail-array-m1000.json");
    let csv = stdout_ok(&["modes", "--config", &cfg, "--band", "0:12e9"]);
    let f = numbers(&csv, "freq_Hz");
    let loaded = DeviceConfig::load(Path::new(&cfg)).unwrap();
    let spacing = PI * derived_params(&loaded.array).unwrap().omega_0 / 1000.0 / TAU;
    // the finite plasma frequency bends the ladder by a few percent already
    assert!(((f[1] - f[0]) / spacing - 1.0).abs() < 0.05, "{} vs {spacing}", f[1] - f[0]);
    assert!(f.windows(3).all(|w| w[2] - w[1] < w[1] - w[0]));
    let parity = column(&csv, "parity");
    assert!(parity.iter().step_by(2).all(|p| p == "odd") && parity.iter().skip(1).step_by(2).all(|p| p == "even"));
}

#[test]
fn empty_band_gives_header_only() {
    for band in ["5e9:4e9", "0:0", "0:1e6"] {
        let csv = stdout_ok(&["modes", "--config", &config("snail-array-8ghz.json"), "--band", band]);
        assert_eq!(csv, "n,parity,freq_Hz,epr,kerr_Hz\n", "{band}");
    }
}

#[test]
fn band_above_plasma_frequency_is_an_input_error() {
    let out = run(&["modes", "--config", &config("snail-array-8ghz.json"), "--band", "0:100e9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plasma"));
}

#[test]
fn config_errors_exit_with_input_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("snail-array-8ghz.json")).unwrap();
    let unknown = write(&dir, "unknown.json", &text.replace("\"flux_frac\"", "\"flux\""));
    let out = run(&["modes", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flux"));

    let broken = write(&dir, "broken.json", &text.replace("46.0", "46.0,,"));
    let out = run(&["modes", "--config", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let out = run(&["sweep-m", "--config", &config("snail-array-8ghz.json"), "--m-range", "10:5:3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["modes"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn example_configs_follow_the_shipped_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root().join("docs/device-config.schema.json")).unwrap()).unwrap();
    let keys = |v: &serde_json::Value| -> Vec<String> {
        let mut k: Vec<String> = v["properties"].as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    assert_eq!(keys(&schema), ["array", "name", "notes", "resonator", "snail"]);
    // a document using every schema property parses
    let full = serde_json::json!({
        "name": "n", "notes": "x",
        "snail": {"alpha": 0.1, "linear_inductance_H": 1e-10},
        "array": {"cells": 3, "cell_length_m": 1.0, "ground_capacitance_F": 1e-15, "shunt_capacitance_F": 1e-13, "flux_frac": 0.1},
        "resonator": {"impedance_ohm": 50.0, "phase_velocity_m_per_s": 1e8, "arm_length_m": 0.01, "design_frequency_Hz": 8e9}
    });
    for section in ["snail", "array", "resonator"] {
        let mut listed = keys(&schema["properties"][section]);
        let mut used: Vec<String> = full[section].as_object().unwrap().keys().cloned().collect();
        if section == "snail" {
            used.push("junction_inductance_H".into());
        }
        listed.sort();
        used.sort();
        assert_eq!(listed, used, "{section}");
    }
    let parsed: DeviceConfig = serde_json::from_value(full).unwrap();
    assert_eq!(parsed.array.cells, 3);
    for name in ["snail-array-8ghz.json", "snail-array-m20.json", "snail-array-m1000.json"] {
        let loaded = DeviceConfig::load(Path::new(&config(name))).unwrap();
        assert!(loaded.warnings.is_empty(), "{name}");
    }
}

fn summary(args: &[&str]) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.csv");
    let mut full = args.to_vec();
    let out_s = out.to_string_lossy().into_owned();
    full.extend(["--out", &out_s]);
    stdout_ok(&full);
    serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap()
}

fn width(v: &serde_json::Value) -> f64 {
    v.as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap() - p[0].as_f64().unwrap()).sum()
}

#[test]
fn flux_map_tiles_band() {
    let s =
        summary(&["flux-map", "--config", &config("snail-array-8ghz.json"), "--band", "4e9:12e9", "--step", "50e6"]);
    let total = width(&s["covered_Hz"]) + width(&s["gaps_Hz"]);
    assert!((total / 8e9 - 1.0).abs() < 1e-12, "{total}");
    assert!(!s["gaps_Hz"].as_array().unwrap().is_empty());
    assert_eq!(s["tolerance_Hz"].as_f64(), Some(10e6));
}

#[test]
fn unlimited_tolerance_leaves_no_gaps() {
    let s = summary(&[
        "flux-map",
        "--config",
        &config("snail-array-8ghz.json"),
        "--band",
        "4e9:12e9",
        "--step",
        "100e6",
        "--tolerance",
        "inf",
    ]);
    assert!(s["gaps_Hz"].as_array().unwrap().is_empty());
    assert_eq!(s["coverage_fraction"].as_f64(), Some(1.0));
    assert!(s["tolerance_Hz"].is_null());
}

#[test]
fn longer_array_covers_more_of_the_band() {
    let base = ["flux-map", "--band", "4e9:12e9", "--step", "20e6", "--config"];
    let with = |cfg: &str| {
        let mut a = base.to_vec();
        let c = config(cfg);
        a.push(&c);
        summary(&a)
    };
    let short = with("snail-array-8ghz.json");
    let long = with("snail-array-m1000.json");
    assert!(width(&long["gaps_Hz"]) < width(&short["gaps_Hz"]));
    assert!(long["coverage_fraction"].as_f64() > short["coverage_fraction"].as_f64());
}

const T_JUNCTION: f64 = 0.03;
const BANDWIDTH: f64 = 1e6;

/// Forward-model samples at the given (frequency, gain, T_sys) points.
fn synthetic_samples(points: &[(f64, f64, f64)]) -> String {
    let mut text = String::from("freq_Hz,bias_V,power_W\n");
    for &(f, gain, t_sys) in points {
        for k in -12..=12 {
            let v = k as f64 * 0.25e-3;
            let p = sntj_noise_power(gain, t_sys, T_JUNCTION, v, BANDWIDTH, TAU * f).unwrap();
            writeln!(text, "{f:e},{v:e},{p:e}").unwrap();
        }
    }
    text
}

fn noise_fit(extra: &[&str], samples: &str) -> String {
    let mut args = vec!["noise-fit", "--samples", samples, "--temperature", "0.03", "--bandwidth", "1e6"];
    args.extend(extra);
    stdout_ok(&args)
}

#[test]
fn noise_fit_recovers_forward_model() {
    let truth = [(6e9, 1e8, 3.0), (7.5e9, 2e8, 4.5), (9e9, 5e7, 6.0)];
    let dir = tempfile::tempdir().unwrap();
    let samples = write(&dir, "s.csv", &synthetic_samples(&truth));
    let csv = noise_fit(&[], &samples);
    let (header, _) = rows(&csv);
    assert_eq!(header, ["freq_Hz", "G_sys_dB", "T_sys_K", "T_N_K", "residual"]);
    let (f, g, t) = (numbers(&csv, "freq_Hz"), numbers(&csv, "G_sys_dB"), numbers(&csv, "T_sys_K"));
    for (i, &(f0, g0, t0)) in truth.iter().enumerate() {
        assert_eq!(f[i], f0);
        assert!((g[i] - linear_to_db(g0)).abs() < 0.01 * 4.343, "{} vs {}", g[i], linear_to_db(g0));
        assert!((t[i] / t0 - 1.0).abs() < 0.02, "{} vs {t0}", t[i]);
    }
    assert!(column(&csv, "T_N_K").iter().all(|v| v.is_empty()));
}

#[test]
fn omitted_eta_equals_unit_transmission() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(&dir, "s.csv", &synthetic_samples(&[(7e9, 1e8, 3.0)]));
    let plain = noise_fit(&[], &samples);
    assert_eq!(plain, noise_fit(&["--eta", "1"], &samples));
    assert_ne!(plain, noise_fit(&["--eta", "0.8"], &samples));
    let out = run(&["noise-fit", "--samples", &samples, "--temperature", "0.03", "--bandwidth", "1e6", "--eta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nvr_table_yields_amplifier_noise() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(&dir, "s.csv", &synthetic_samples(&[(7e9, 1e8, 3.0)]));
    let csv = noise_fit(&[], &samples);
    let t_sys = numbers(&csv, "T_sys_K")[0];
    let (gain_db, t_n) = (20.0, 0.25);
    let nvr = noise_visibility_ratio(t_n, 10f64.powf(gain_db / 10.0), t_sys, TAU * 7e9);
    let table = write(&dir, "nvr.csv", &format!("freq_Hz,NVR,gain_dB\n7e9,{nvr:e},{gain_db}\n8e9,10,20\n"));
    let with_nvr = noise_fit(&["--nvr", &table], &samples);
    let recovered = numbers(&with_nvr, "T_N_K")[0];
    assert!((recovered / t_n - 1.0).abs() < 1e-9, "{recovered}");
}

#[test]
fn missing_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(&dir, "s.csv", "freq_Hz,bias_V,power\n7e9,1e-3,1e-12\n");
    let out = run(&["noise-fit", "--samples", &samples, "--temperature", "0.03", "--bandwidth", "1e6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power_W"));
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = synthetic_samples(&[(7e9, 1e8, 3.0)]);
    text.push_str("7e9,oops,1e-12\n");
    let samples = write(&dir, "s.csv", &text);
    let out = run(&["noise-fit", "--samples", &samples, "--temperature", "0.03", "--bandwidth", "1e6"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":27:") && stderr.contains("bias_V"), "{stderr}");
}

#[test]
fn unusable_sweep_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let samples = write(&dir, "s.csv", "freq_Hz,bias_V,power_W\n7e9,1e-3,1e-12\n7e9,-1e-3,1e-12\n");
    let out = run(&["noise-fit", "--samples", &samples, "--temperature", "0.03", "--bandwidth", "1e6"]);
    assert_eq!(out.status.code(), Some(3));
}
