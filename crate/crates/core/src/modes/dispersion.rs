//! Roots of the odd/even dispersion relations.
//!
//! The search runs in the array half-phase `θ = k_S d0 / 2`, which maps
//! `ω ∈ [0, ω_p)` onto `[0, ∞)` and spreads the modes crowding below the
//! plasma frequency evenly. Each relation is rewritten as a continuous
//! phase `Φ(θ) = ρ + θ + δ(θ)` with `|δ| < π/2`, whose level crossings are
//! the roots:
//!
//! * odd:  `sin ρ sin θ − ζs cos ρ cos θ = 0`  ⇔  `Φ_odd  = π/2 + mπ`
//! * even: `sin ρ cos θ + ζs cos ρ sin θ = 0`  ⇔  `Φ_even = (m+1)π`
//!
//! with `ρ = k_r d_r`, `ζ = Z_c / Z_line` and `s = sqrt(1 − ω²/ω_p²)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

use super::{derived_params, DeviceModel, ModeFrequency, Parity};
use crate::error::{Error, Result};
use crate::roots::{brent_with_values, Tolerance};

/// Sub-samples between consecutive phase breakpoints.
const SUBDIVISIONS: usize = 4;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dispersion {
    cells: f64,
    omega_p: f64,
    omega_0: f64,
    zeta: f64,
    /// `d_r / v_r` [s].
    lead_delay: f64,
}

impl Dispersion {
    pub(crate) fn new(device: &DeviceModel) -> Result<Self> {
        device.resonator.validate()?;
        let p = derived_params(&device.array)?;
        Ok(Dispersion {
            cells: device.array.cells as f64,
            omega_p: p.omega_p,
            omega_0: p.omega_0,
            zeta: device.resonator.impedance / p.line_impedance,
            lead_delay: device.resonator.arm_length / device.resonator.phase_velocity,
        })
    }

    pub(crate) fn plasma(&self, omega: f64) -> f64 {
        if self.omega_p.is_infinite() {
            1.0
        } else {
            (1.0 - (omega / self.omega_p).powi(2)).max(0.0).sqrt()
        }
    }

    pub(crate) fn theta_at(&self, omega: f64) -> f64 {
        self.cells * omega / (2.0 * self.omega_0 * self.plasma(omega))
    }

    pub(crate) fn omega_at(&self, theta: f64) -> f64 {
        let t = 2.0 * self.omega_0 * theta / self.cells;
        if self.omega_p.is_infinite() {
            t
        } else {
            t / (1.0 + (t / self.omega_p).powi(2)).sqrt()
        }
    }

    fn phase(&self, parity: Parity, theta: f64) -> f64 {
        let omega = self.omega_at(theta);
        let zs = self.zeta * self.plasma(omega);
        let (sin, cos) = theta.sin_cos();
        let sc = sin * cos;
        let offset = match parity {
            Parity::Odd => ((1.0 - zs) * sc / (zs * cos * cos + sin * sin)).atan(),
            Parity::Even => ((zs - 1.0) * sc / (cos * cos + zs * sin * sin)).atan(),
        };
        self.lead_delay * omega + theta + offset
    }

    /// Breakpoints at every eighth of a turn in `θ` and in `ρ`, subdivided.
    fn grid(&self, theta_max: f64) -> Vec<f64> {
        let mut cuts = vec![0.0, theta_max];
        let mut j = 1.0;
        while j * FRAC_PI_8 < theta_max {
            cuts.push(j * FRAC_PI_8);
            j += 1.0;
        }
        if self.lead_delay > 0.0 {
            let omega_max = self.omega_at(theta_max);
            let mut k = 1.0;
            while k * FRAC_PI_8 / self.lead_delay < omega_max {
                cuts.push(self.theta_at(k * FRAC_PI_8 / self.lead_delay));
                k += 1.0;
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut grid = Vec::with_capacity(cuts.len() * SUBDIVISIONS);
        for w in cuts.windows(2) {
            for i in 0..SUBDIVISIONS {
                grid.push(w[0] + (w[1] - w[0]) * i as f64 / SUBDIVISIONS as f64);
            }
        }
        grid.push(theta_max);
        grid
    }

    /// All roots with `0 < θ ≤ theta_max`, ascending, as `(θ, parity)`.
    fn roots_up_to(&self, theta_max: f64) -> Result<Vec<(f64, Parity)>> {
        let grid = self.grid(theta_max);
        let mut roots = Vec::new();
        for parity in [Parity::Odd, Parity::Even] {
            let level = |m: i64| match parity {
                Parity::Odd => FRAC_PI_2 + m as f64 * PI,
                Parity::Even => (m + 1) as f64 * PI,
            };
            let values: Vec<f64> = grid.iter().map(|&t| self.phase(parity, t)).collect();
            for (i, w) in grid.windows(2).enumerate() {
                let (fa, fb) = (values[i], values[i + 1]);
                let (lo, hi) = if fb >= fa { (fa, fb) } else { (fb, fa) };
                // levels L with lo < L <= hi (crossings use the `>= 0` side)
                let first = levels_at_or_below(&level, lo);
                let last = levels_at_or_below(&level, hi);
                for m in first..last {
                    let target = level(m);
                    let g = |t: f64| self.phase(parity, t) - target;
                    let theta = brent_with_values(g, w[0], w[1], fa - target, fb - target, Tolerance::default())?;
                    roots.push((theta, parity));
                }
            }
        }
        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(roots)
    }
}

/// Number of levels `level(0) < level(1) < ...` that are `<= x`.
fn levels_at_or_below(level: &impl Fn(i64) -> f64, x: f64) -> i64 {
    let mut m = ((x - level(0)) / PI).floor().max(-1.0) as i64 + 1;
    while level(m) <= x {
        m += 1;
    }
    while m > 0 && level(m - 1) > x {
        m -= 1;
    }
    m
}

fn tag(roots: Vec<(f64, Parity)>, disp: &Dispersion) -> Vec<ModeFrequency> {
    roots
        .into_iter()
        .enumerate()
        .map(|(i, (theta, parity))| ModeFrequency { n: i + 1, omega: disp.omega_at(theta), parity })
        .collect()
}

/// All modes with `omega_lo <= ω <= omega_hi` [rad/s], ascending, with
/// indices counted from the fundamental.
pub fn mode_frequencies(device: &DeviceModel, band: (f64, f64)) -> Result<Vec<ModeFrequency>> {
    let (lo, hi) = band;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter { name: "band", reason: format!("non-finite band {lo}..{hi}") });
    }
    let disp = Dispersion::new(device)?;
    if hi <= 0.0 || lo > hi {
        return Ok(Vec::new());
    }
    if hi >= disp.omega_p {
        return Err(Error::FrequencyAbovePlasma { omega: hi, omega_p: disp.omega_p });
    }
    let modes = tag(disp.roots_up_to(disp.theta_at(hi))?, &disp);
    Ok(modes.into_iter().filter(|m| m.omega >= lo && m.omega <= hi).collect())
}

/// The `n`-th mode (1-based, ascending in frequency).
pub fn nth_mode(device: &DeviceModel, n: usize) -> Result<ModeFrequency> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "mode index is 1-based".into() });
    }
    let disp = Dispersion::new(device)?;
    // the n-th root has Φ = nπ/2 and Φ ≥ θ − π/2
    let mut theta_max = (n as f64 + 2.0) * FRAC_PI_2;
    loop {
        let roots = disp.roots_up_to(theta_max)?;
        if roots.len() >= n {
            return Ok(tag(roots, &disp)[n - 1]);
        }
        theta_max *= 2.0;
        if !theta_max.is_finite() {
            return Err(Error::SolverFailure { lo: 0.0, hi: theta_max, reason: format!("mode {n} not found") });
        }
    }
}
