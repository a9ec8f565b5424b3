use std::f64::consts::TAU;

use arraymode::kerr::self_kerr_numeric;
use arraymode::modes::{mode_frequencies, mode_profile, nth_mode, solve_modes};
use arraymode::planner::coverage_map;
use arraymode_bench::reference_device;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn dispersion(c: &mut Criterion) {
    let mut group = c.benchmark_group("mode_frequencies");
    for cells in [20, 200, 1000] {
        let device = reference_device(cells);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &device, |b, d| {
            b.iter(|| mode_frequencies(black_box(d), (0.0, TAU * 20e9)).unwrap())
        });
    }
    group.finish();
}

fn profiles(c: &mut Criterion) {
    let device = reference_device(200);
    let fundamental = nth_mode(&device, 1).unwrap();
    c.bench_function("mode_profile/200", |b| b.iter(|| mode_profile(black_box(&device), &fundamental).unwrap()));
    c.bench_function("solve_modes/1000", |b| {
        let d = reference_device(1000);
        b.iter(|| solve_modes(black_box(&d), (0.0, TAU * 20e9)).unwrap())
    });
}

fn kerr(c: &mut Criterion) {
    let device = reference_device(200);
    let mode = mode_profile(&device, &nth_mode(&device, 1).unwrap()).unwrap();
    c.bench_function("self_kerr_numeric/200", |b| b.iter(|| self_kerr_numeric(black_box(&device), &mode).unwrap()));
}

fn coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage_map");
    group.sample_size(10);
    for cells in [200, 1000] {
        let device = reference_device(cells);
        group.bench_with_input(BenchmarkId::from_parameter(cells), &device, |b, d| {
            b.iter(|| coverage_map(black_box(d), (TAU * 4e9, TAU * 12e9), TAU * 50e6, TAU * 10e6).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dispersion, profiles, kerr, coverage);
criterion_main!(benches);
