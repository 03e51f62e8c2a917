//! Benchmarks for the two pattern engines and the spectral pipeline. The
//! interesting ratio is closed form vs cascade vs integrator on the same
//! cell; the sweep and transform benches track the batch paths end to end.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use lzs_core::impulse::{cascade_evolve, pattern_sweep, return_probability};
use lzs_core::model::linspace;
use lzs_core::schrodinger::propagate;
use lzs_core::spectral::{dft_series, ft_map, Window};
use lzs_core::{DtPolicy, Stokes, SystemSpec, Tls, TrianglePulse};

fn chain(n: usize) -> (SystemSpec, TrianglePulse) {
    let tls: Vec<Tls> = (1..=n)
        .map(|k| Tls { epsilon: 0.7 * k as f64, delta: 0.05 + 0.01 * k as f64 })
        .collect();
    let sys = SystemSpec::new(tls, 1.0).unwrap();
    let pulse = TrianglePulse::new(0.7 * n as f64 * 1.3, 60.0).unwrap();
    (sys, pulse)
}

fn bench_single_cell(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_cell");
    for n in [2usize, 6] {
        let (sys, pulse) = chain(n);
        group.bench_function(format!("return_probability_n{n}"), |b| {
            b.iter(|| return_probability(black_box(&sys), black_box(&pulse), Stokes::On).unwrap())
        });
        group.bench_function(format!("cascade_evolve_n{n}"), |b| {
            b.iter(|| cascade_evolve(black_box(&sys), black_box(&pulse), Stokes::On).unwrap())
        });
    }
    let (sys, pulse) = chain(2);
    let dt = DtPolicy::default().step_for(&sys, &pulse).unwrap();
    group.sample_size(10);
    group.bench_function("propagate_n2", |b| {
        b.iter(|| propagate(black_box(&sys), black_box(&pulse), black_box(dt)).unwrap())
    });
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let (sys, _) = chain(2);
    let t_axis = linspace(20.0, 120.0, 32).unwrap();
    let a_axis = linspace(1.5, 2.4, 32).unwrap();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(20);
    group.bench_function("pattern_sweep_32x32", |b| {
        b.iter(|| pattern_sweep(black_box(&sys), &t_axis, &a_axis, Stokes::On).unwrap())
    });
    group.finish();
}

fn bench_spectral(c: &mut Criterion) {
    let series: Vec<f64> = (0..256)
        .map(|j| 0.5 + 0.3 * (0.21 * j as f64).cos() + 0.1 * (0.83 * j as f64).cos())
        .collect();
    let (sys, _) = chain(2);
    let t_axis = linspace(20.0, 120.0, 64).unwrap();
    let a_axis = linspace(1.5, 2.4, 16).unwrap();
    let grid = pattern_sweep(&sys, &t_axis, &a_axis, Stokes::On).unwrap();
    let mut group = c.benchmark_group("spectral");
    group.bench_function("dft_series_256", |b| {
        b.iter_batched(|| series.clone(), |s| dft_series(&s).unwrap(), BatchSize::SmallInput)
    });
    group.bench_function("ft_map_64x16_hann", |b| {
        b.iter(|| ft_map(black_box(&grid), Window::Hann).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_single_cell, bench_sweep, bench_spectral);
criterion_main!(benches);
