use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use viscodiff_bench::double_well;
use viscodiff_core::basis::project;
use viscodiff_core::hysteresis::{driver_grid, play_trajectory, viscous_trajectory};
use viscodiff_core::{run, GalerkinSystem, Scheme};

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n in [8, 32, 128] {
        let config = double_well(n, 1.0, 1e-3);
        let system = GalerkinSystem::from_config(&config).unwrap();
        let f = config.initial.to_function(config.length).unwrap();
        let a = project(f, n, system.quadrature(), system.domain()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| system.rhs(0.0, black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    let config = double_well(32, 1.0, 1e-3);
    let system = GalerkinSystem::from_config(&config).unwrap();
    let f = config.initial.to_function(config.length).unwrap();
    let a = project(f, 32, system.quadrature(), system.domain()).unwrap();
    let state = system.state(0.0, a).unwrap();
    for scheme in [Scheme::Rk4, Scheme::ImplicitEuler] {
        group.bench_function(scheme.name(), |b| {
            b.iter(|| system.step(black_box(&state), 1e-3, scheme, 1e-12).unwrap())
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let config = double_well(16, 0.1, 1e-3);
    c.bench_function("run/n16_100steps", |b| {
        b.iter(|| run(black_box(&config)).unwrap())
    });
}

fn hysteresis(c: &mut Criterion) {
    let grid = driver_grid(2, 4000);
    c.bench_function("play_trajectory/8000", |b| {
        b.iter(|| play_trajectory(2.0, 1.0, 1.0, black_box(&grid)).unwrap())
    });
    c.bench_function("viscous_trajectory/8000", |b| {
        b.iter(|| viscous_trajectory(2.0, 1.0, 1.0, 1.0, 100.0, black_box(&grid)).unwrap())
    });
}

criterion_group!(benches, assembly, stepping, full_run, hysteresis);
criterion_main!(benches);
