use std::hint::black_box;

use bmclab_bench::{lattice_spec, realization, recurrent_spec};
use bmclab_core::criterion::CriterionOptions;
use bmclab_core::spectral::{min_superharmonic_t, spectral_radius_sup, spectral_radius_window};
use bmclab_core::{build_moment_kernel, convolve_n, criterion_value, Boundary};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn power_iteration(c: &mut Criterion) {
    let spec = recurrent_spec();
    let mut group = c.benchmark_group("power_iteration");
    for l in [10i64, 50, 100] {
        let env = realization(&spec, l, 1);
        let k = build_moment_kernel(&env, env.window(), Boundary::Truncated).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(l), &k, |b, k| {
            b.iter(|| spectral_radius_window(black_box(k), 1e-10, 1_000_000).unwrap())
        });
    }
    group.finish();

    let env = realization(&spec, 100, 1);
    c.bench_function("spectral_radius_sup/10,50,100", |b| {
        b.iter(|| spectral_radius_sup(black_box(&env), &[10, 50, 100], 1e-10, 1_000_000).unwrap())
    });
}

fn superharmonic(c: &mut Criterion) {
    let env = realization(&lattice_spec(2, 1.1), 10, 0);
    let k = build_moment_kernel(&env, env.window(), Boundary::Truncated).unwrap();
    c.bench_function("min_superharmonic_t/2d_L10", |b| {
        b.iter(|| min_superharmonic_t(black_box(&k), 1e-10).unwrap())
    });
}

fn kernel_powers(c: &mut Criterion) {
    let env = realization(&recurrent_spec(), 40, 2);
    let k = build_moment_kernel(&env, env.window(), Boundary::Truncated).unwrap();
    c.bench_function("convolve_n/L40_n32", |b| b.iter(|| convolve_n(black_box(&k), 32)));
}

fn minimax(c: &mut Criterion) {
    let spec = recurrent_spec();
    c.bench_function("criterion_value/two_laws", |b| {
        b.iter(|| criterion_value(black_box(&spec), CriterionOptions::default()).unwrap())
    });
    let lattice = lattice_spec(3, 1.1);
    c.bench_function("criterion_value/3d_single_law", |b| {
        b.iter(|| criterion_value(black_box(&lattice), CriterionOptions::default()).unwrap())
    });
}

criterion_group!(benches, power_iteration, superharmonic, kernel_powers, minimax);
criterion_main!(benches);
