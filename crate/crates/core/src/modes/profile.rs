//! Spatial mode profiles from the null space of the boundary conditions,
//! and energy integrals over them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::{Matrix6, Vector6};
use rayon::prelude::*;

use super::dispersion::{mode_frequencies, Dispersion};
use super::{derived_params, DeviceModel, ModeAmplitudes, ModeFrequency, ModeSolution, Parity};
use crate::error::{Error, Result};

/// Ratio of the two smallest singular values' scales below which the null
/// space is considered two-dimensional.
const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Boundary residual above which the null vector is rejected.
const RESIDUAL_LIMIT: f64 = 1e-8;

/// One sinusoidal piece `φ(u) = a cos(k u) + b sin(k u)` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    pub k: f64,
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
}

impl Piece {
    /// `∫ cos², ∫ sin², ∫ sin cos` over the piece, cancellation-free.
    fn trig_integrals(&self) -> (f64, f64, f64) {
        let len = self.hi - self.lo;
        if self.k == 0.0 {
            return (len, 0.0, 0.0);
        }
        let (sum, diff) = (self.k * (self.hi + self.lo), self.k * len);
        // sin 2ku1 − sin 2ku0 = 2 cos(k(u1+u0)) sin(k(u1−u0)), etc.
        let half_diff_sin2 = sum.cos() * diff.sin() / (2.0 * self.k);
        let sin_cos = sum.sin() * diff.sin() / (2.0 * self.k);
        (0.5 * len + half_diff_sin2, 0.5 * len - half_diff_sin2, sin_cos)
    }

    /// `∫ φ²`.
    pub fn flux_squared(&self) -> f64 {
        let (cc, ss, sc) = self.trig_integrals();
        self.a * self.a * cc + self.b * self.b * ss + 2.0 * self.a * self.b * sc
    }

    /// `∫ φ'²`.
    pub fn gradient_squared(&self) -> f64 {
        let (cc, ss, sc) = self.trig_integrals();
        self.k * self.k * (self.a * self.a * ss + self.b * self.b * cc - 2.0 * self.a * self.b * sc)
    }

    /// `max |φ|` over the piece.
    pub fn max_abs(&self) -> f64 {
        let r = self.a.hypot(self.b);
        if r == 0.0 {
            return 0.0;
        }
        let delta = self.b.atan2(self.a);
        let (p0, p1) = (self.k * self.lo - delta, self.k * self.hi - delta);
        let (p0, p1) = if p0 <= p1 { (p0, p1) } else { (p1, p0) };
        let pi = std::f64::consts::PI;
        if (p1 / pi).floor() >= (p0 / pi).ceil() {
            return r;
        }
        let at = |u: f64| (self.a * (self.k * u).cos() + self.b * (self.k * u).sin()).abs();
        at(self.lo).max(at(self.hi))
    }
}

/// The device pieces of a mode: left lead, array, right lead. Lead pieces
/// are omitted when `d_r = 0`.
pub(crate) fn pieces(device: &DeviceModel, mode: &ModeSolution) -> Vec<Piece> {
    let half = 0.5 * device.array.length();
    let d_r = device.resonator.arm_length;
    let amp = &mode.amplitudes;
    let array = Piece { k: mode.k_s, lo: -half, hi: half, a: amp.array_cos, b: amp.array_sin };
    if d_r == 0.0 {
        return vec![array];
    }
    vec![
        Piece { k: mode.k_r, lo: -d_r, hi: 0.0, a: amp.left_cos, b: amp.left_sin },
        array,
        Piece { k: mode.k_r, lo: 0.0, hi: d_r, a: amp.right_cos, b: amp.right_sin },
    ]
}

/// Boundary-condition matrix acting on
/// `(A_-, B_-, A_S, B_S, A_+, B_+)`: open ends, flux continuity and current
/// continuity at both array edges.
fn boundary_matrix(theta: f64, rho: f64, zs: f64) -> Matrix6<f64> {
    let (st, ct) = theta.sin_cos();
    let (sr, cr) = rho.sin_cos();
    #[rustfmt::skip]
    let m = Matrix6::new(
        sr,  cr,  0.0,      0.0,      0.0, 0.0,
        0.0, 0.0, 0.0,      0.0,      -sr, cr,
        1.0, 0.0, -ct,      st,       0.0, 0.0,
        0.0, 0.0, -ct,      -st,      1.0, 0.0,
        0.0, 1.0, -zs * st, -zs * ct, 0.0, 0.0,
        0.0, 0.0, zs * st,  -zs * ct, 0.0, 1.0,
    );
    m
}

/// Solves the flux profile of a mode found by the dispersion search.
pub fn mode_profile(device: &DeviceModel, mode: &ModeFrequency) -> Result<ModeSolution> {
    let disp = Dispersion::new(device)?;
    let p = derived_params(&device.array)?;
    let omega = mode.omega;
    if omega >= p.omega_p {
        return Err(Error::FrequencyAbovePlasma { omega, omega_p: p.omega_p });
    }
    let s = disp.plasma(omega);
    let theta = disp.theta_at(omega);
    let k_r = omega / device.resonator.phase_velocity;
    let rho = k_r * device.resonator.arm_length;
    let zs = device.resonator.impedance / p.line_impedance * s;
    let k_s = omega / (device.array.cell_length * p.omega_0 * s);

    let b = boundary_matrix(theta, rho, zs);
    let svd = b.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::SolverFailure {
        lo: omega,
        hi: omega,
        reason: "singular value decomposition did not converge".into(),
    })?;
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (smallest, second, largest) = (order[0], svd.singular_values[order[1]], svd.singular_values[order[5]]);
    if second / largest < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateNullspace { omega, condition: largest / second });
    }
    let null: Vector6<f64> = v_t.row(smallest).transpose();
    let residual = (b * null).norm() / (b.norm() * null.norm());
    if !(residual < RESIDUAL_LIMIT) {
        return Err(Error::SolverFailure {
            lo: omega,
            hi: omega,
            reason: format!("boundary residual {residual:.3e} at a dispersion root"),
        });
    }

    let mut solution = ModeSolution {
        n: mode.n,
        parity: mode.parity,
        omega,
        k_r,
        k_s,
        amplitudes: ModeAmplitudes::from_array(null.into()),
        epr: 0.0,
        residual,
    };
    let peak = pieces(device, &solution).iter().map(Piece::max_abs).fold(0.0, f64::max);
    let largest_component =
        solution.amplitudes.to_array().into_iter().max_by(|x, y| x.abs().total_cmp(&y.abs())).unwrap_or(1.0);
    solution.amplitudes = solution.amplitudes.scaled(largest_component.signum() / peak);
    if solution.parity == Parity::Odd {
        solution.amplitudes.array_cos = 0.0;
    }
    solution.epr = participation(device, &solution);
    Ok(solution)
}

/// Profiles of every mode in `band` [rad/s], in ascending order.
pub fn solve_modes(device: &DeviceModel, band: (f64, f64)) -> Result<Vec<ModeSolution>> {
    mode_frequencies(device, band)?.par_iter().map(|m| mode_profile(device, m)).collect()
}

/// Quadratic energy integrals of a mode profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEnergies {
    /// `∫ c φ² + c_S φ'²` over the device [F].
    pub capacitance: f64,
    /// `∫ φ'² / ℓ` in the array [1/H].
    pub array_inverse_inductance: f64,
    /// `∫ φ'² / ℓ` in the leads [1/H].
    pub lead_inverse_inductance: f64,
}

impl ModeEnergies {
    /// `1 / L_eff` [1/H].
    pub fn inverse_inductance(&self) -> f64 {
        self.array_inverse_inductance + self.lead_inverse_inductance
    }

    /// Effective mode frequency `1/sqrt(L_eff C_eff)` [rad/s].
    pub fn frequency(&self) -> f64 {
        (self.inverse_inductance() / self.capacitance).sqrt()
    }
}

pub fn mode_energies(device: &DeviceModel, mode: &ModeSolution) -> Result<ModeEnergies> {
    let l_s = derived_params(&device.array)?.linear_inductance;
    let a = device.array.cell_length;
    let (c_0, c_s, ell_s) = (device.array.ground_capacitance / a, device.array.shunt_capacitance * a, l_s / a);
    let (c_r, ell_r) = (device.resonator.capacitance_per_length(), device.resonator.inductance_per_length());
    let mut out = ModeEnergies { capacitance: 0.0, array_inverse_inductance: 0.0, lead_inverse_inductance: 0.0 };
    let pieces = pieces(device, mode);
    let lead_count = pieces.len() - 1;
    for (i, piece) in pieces.iter().enumerate() {
        let is_array = lead_count == 0 || i == 1;
        if is_array {
            out.capacitance += c_0 * piece.flux_squared() + c_s * piece.gradient_squared();
            out.array_inverse_inductance += piece.gradient_squared() / ell_s;
        } else {
            out.capacitance += c_r * piece.flux_squared();
            out.lead_inverse_inductance += piece.gradient_squared() / ell_r;
        }
    }
    Ok(out)
}

/// Fraction of the mode's inductive energy stored in the array.
pub fn participation(device: &DeviceModel, mode: &ModeSolution) -> f64 {
    match mode_energies(device, mode) {
        Ok(e) => e.array_inverse_inductance / e.inverse_inductance(),
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::fixtures::*;
    use super::super::{nth_mode, ArraySpec, ResonatorSpec};
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    fn first_modes(device: &DeviceModel, count: usize) -> Vec<ModeSolution> {
        (1..=count).map(|n| mode_profile(device, &nth_mode(device, n).unwrap()).unwrap()).collect()
    }

    #[test]
    fn piece_integrals_match_quadrature() {
        for p in [
            Piece { k: 3.0, lo: -0.4, hi: 1.3, a: 0.7, b: -1.1 },
            Piece { k: 1e-7, lo: 0.0, hi: 2.0, a: 1.0, b: 0.3 },
            Piece { k: 250.0, lo: -0.01, hi: 0.03, a: -0.2, b: 0.9 },
        ] {
            let phi = |u: f64| p.a * (p.k * u).cos() + p.b * (p.k * u).sin();
            let dphi = |u: f64| p.k * (-p.a * (p.k * u).sin() + p.b * (p.k * u).cos());
            let q2 = simpson(|u| phi(u).powi(2), p.lo, p.hi, 20_000);
            let qd = simpson(|u| dphi(u).powi(2), p.lo, p.hi, 20_000);
            assert!((p.flux_squared() - q2).abs() <= 1e-10 * q2.abs().max(1e-300));
            assert!((p.gradient_squared() - qd).abs() <= 1e-9 * qd.abs().max(1e-20));
            let grid_max = (0..=100_000).map(|i| phi(p.lo + (p.hi - p.lo) * i as f64 / 1e5).abs()).fold(0.0, f64::max);
            assert!((p.max_abs() - grid_max).abs() < 1e-8);
        }
    }

    #[test]
    fn profiles_are_max_normalized_and_continuous() {
        let device = at_8ghz(50);
        let half = 0.5 * device.array.length();
        for mode in first_modes(&device, 8) {
            assert!(mode.residual < 1e-12, "residual {}", mode.residual);
            let span = device.length();
            let samples: Vec<f64> =
                (0..=40_000).map(|i| mode.flux_at(&device, -0.5 * span + span * i as f64 / 40_000.0)).collect();
            let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((peak - 1.0).abs() < 1e-6);
            let eps = 1e-12 * span;
            for edge in [-half, half] {
                let jump = mode.flux_at(&device, edge - eps) - mode.flux_at(&device, edge + eps);
                assert!(jump.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn parity_symmetry() {
        let device = at_8ghz(30);
        for mode in first_modes(&device, 6) {
            let sign = match mode.parity {
                Parity::Odd => -1.0,
                Parity::Even => 1.0,
            };
            for x in [0.1, 0.3, 0.45, 0.49, 0.6, 0.9] {
                let x = x * 0.5 * device.length();
                let (l, r) = (mode.flux_at(&device, -x), mode.flux_at(&device, x));
                assert!((l - sign * r).abs() < 1e-9, "n={} x={x}", mode.n);
            }
            if mode.parity == Parity::Odd {
                assert_eq!(mode.amplitudes.array_cos, 0.0);
            }
        }
    }

    #[test]
    fn shooting_integration_reproduces_profile() {
        // RK4 on (φ, I) with I = κ φ' from the open left end; κ = 1/ℓ_r in the
        // leads and (1/ℓ_S − ω² c_S) in the array
        let device = at_8ghz(40);
        let p = derived_params(&device.array).unwrap();
        let a = device.array.cell_length;
        let (ell_r, c_r) = (device.resonator.inductance_per_length(), device.resonator.capacitance_per_length());
        let (ell_s, c_0, c_s) =
            (p.linear_inductance / a, device.array.ground_capacitance / a, device.array.shunt_capacitance * a);
        let half = 0.5 * device.array.length();
        let x0 = -0.5 * device.length();
        for mode in first_modes(&device, 3) {
            let w2 = mode.omega * mode.omega;
            let lead = (1.0 / ell_r, c_r);
            let arr = (1.0 / ell_s - w2 * c_s, c_0);
            let mut y = [mode.flux_at(&device, x0), 0.0];
            let mut max_err: f64 = 0.0;
            for (lo, hi, (kappa, cap)) in [(x0, -half, lead), (-half, half, arr), (half, -x0, lead)] {
                let rhs = |y: [f64; 2]| [y[1] / kappa, -w2 * cap * y[0]];
                let steps = 20_000;
                let h = (hi - lo) / steps as f64;
                for i in 1..=steps {
                    let k1 = rhs(y);
                    let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
                    let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
                    let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
                    for j in 0..2 {
                        y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                    }
                    let x = (lo + i as f64 * h).clamp(lo, hi);
                    let inside = x.clamp(lo + 1e-12 * h.abs(), hi - 1e-12 * h.abs());
                    max_err = max_err.max((y[0] - mode.flux_at(&device, inside)).abs());
                }
            }
            assert!(max_err < 1e-6, "n={} err {max_err}", mode.n);
            // open right end: the current scale is ω c_r ∫|φ| ~ ω c_r d1
            let current_scale = mode.omega.sqrt() * w2.sqrt() * c_r * device.length();
            assert!(y[1].abs() < 1e-6 * current_scale, "n={} end current {}", mode.n, y[1]);
        }
    }

    #[test]
    fn energies_match_quadrature() {
        let device = at_8ghz(80);
        let p = derived_params(&device.array).unwrap();
        let half = 0.5 * device.array.length();
        let d_r = device.resonator.arm_length;
        for mode in first_modes(&device, 4) {
            let e = mode_energies(&device, &mode).unwrap();
            let n = 200_000;
            let grad2 =
                |x: f64, h: f64| ((mode.flux_at(&device, x + h) - mode.flux_at(&device, x - h)) / (2.0 * h)).powi(2);
            let ha = 1e-7 * half;
            let arr = simpson(|x| grad2(x, ha), -half + 2.0 * ha, half - 2.0 * ha, n) / p.linear_inductance;
            let hr = 1e-7 * d_r;
            let leads = 2.0 * simpson(|x| grad2(x, hr), half + 2.0 * hr, half + d_r - 2.0 * hr, n)
                / device.resonator.inductance_per_length();
            assert!((e.array_inverse_inductance / arr - 1.0).abs() < 1e-4);
            assert!((e.lead_inverse_inductance / leads - 1.0).abs() < 1e-4);
            let epr = arr / (arr + leads);
            assert!((mode.epr - epr).abs() < 1e-4);
        }
    }

    #[test]
    fn virial_balance_holds_at_eigenmodes() {
        // for a true eigenmode ω² C_eff = 1/L_eff
        for device in [at_8ghz(5), at_8ghz(120), zero_lead(500)] {
            for mode in first_modes(&device, 5) {
                let e = mode_energies(&device, &mode).unwrap();
                assert!((e.frequency() / mode.omega - 1.0).abs() < 1e-9, "n={}", mode.n);
            }
        }
    }

    #[test]
    fn observables_independent_of_cell_length() {
        let base = at_8ghz(60);
        let mut scaled = base;
        scaled.array.cell_length = 37e-6;
        let (m1, m2) = (first_modes(&base, 4), first_modes(&scaled, 4));
        for (a, b) in m1.iter().zip(&m2) {
            assert!((a.omega / b.omega - 1.0).abs() < 1e-12);
            assert!((a.epr - b.epr).abs() < 1e-12);
            assert!((a.k_r - b.k_r).abs() < 1e-12 * a.k_r);
            for (x, y) in a.amplitudes.to_array().iter().zip(b.amplitudes.to_array()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_lead_participation_is_unity() {
        for mode in first_modes(&zero_lead(300), 3) {
            assert_eq!(mode.epr, 1.0);
        }
    }

    #[test]
    fn small_array_participation_per_cell() {
        // short array: p/M tends to L_S / (L_S M + lead inductance)
        let device = at_8ghz(1);
        let mode = mode_profile(&device, &nth_mode(&device, 1).unwrap()).unwrap();
        assert!(mode.epr > 0.05 && mode.epr < 0.1, "p = {}", mode.epr);
    }

    #[test]
    fn uniform_line_profile_is_a_cosine() {
        let mut array: ArraySpec = array(20);
        array.shunt_capacitance = 0.0;
        let p = derived_params(&array).unwrap();
        let v = array.cell_length * p.omega_0;
        let device =
            DeviceModel::new(array, ResonatorSpec { impedance: p.line_impedance, phase_velocity: v, arm_length: 13.0 })
                .unwrap();
        let len = device.length();
        for mode in first_modes(&device, 4) {
            let k = PI * mode.n as f64 / len;
            for i in 0..=50 {
                let x = -0.5 * len + len * i as f64 / 50.0;
                let expected = (k * (x + 0.5 * len)).cos();
                let got = mode.flux_at(&device, x);
                assert!((got.abs() - expected.abs()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn solve_modes_in_order() {
        let device = at_8ghz(25);
        let modes = solve_modes(&device, (0.0, 2.0 * PI * 40e9)).unwrap();
        for (i, m) in modes.iter().enumerate() {
            assert_eq!(m.n, i + 1);
            assert!(m.epr > 0.0 && m.epr <= 1.0);
        }
    }
}
