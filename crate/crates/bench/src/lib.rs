//! Reference devices shared by the benchmarks in `benches/`.

use std::f64::consts::TAU;

use arraymode::modes::design_for_frequency;
use arraymode::{ArraySpec, DeviceModel, SnailSpec};

/// Array with 110 pH linear inductance, 0.71 fF to ground and 0.11 pF
/// across each cell, zero flux.
pub fn reference_array(cells: u32) -> ArraySpec {
    ArraySpec {
        cells,
        cell_length: 1.0,
        ground_capacitance: 0.71e-15,
        shunt_capacitance: 0.11e-12,
        snail: SnailSpec::from_linear_inductance(0.1, 110e-12).expect("valid SNAIL"),
        flux_frac: 0.0,
    }
}

/// Reference array between 46 Ω leads sized for an 8 GHz fundamental
/// (no leads once the array alone resonates lower).
pub fn reference_device(cells: u32) -> DeviceModel {
    design_for_frequency(TAU * 8e9, reference_array(cells), 46.0, 1.2e8).expect("valid device")
}
