//! Rayon vs sequential baselines for the two hot loops: grid quadrature
//! (oracle moments on a 512^2 wavefunction) and the Monte Carlo
//! determinant-invariance sweep.
//!
//! Build with `--no-default-features` to benchmark the sequential-only
//! configuration; the `*_parallel` functions then run the fallback path.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::{dmatrix, dvector};
use qrf_core::oracle::{
    gaussian_wavefunction_with, grid_moments_with, GaussianWavefunctionSpec, GridPolicy,
};
use qrf_core::sweep::determinant_invariance_max_deviation;
use qrf_core::{Label, Parallelism, ParticleSystem};

fn two_axis_spec() -> GaussianWavefunctionSpec {
    GaussianWavefunctionSpec::new(
        ParticleSystem::unit_masses(3).unwrap(),
        Label::from("A"),
        dvector![0.1, -0.2],
        dmatrix![0.7, 0.15; 0.15, 0.9],
        dmatrix![0.3, -0.1; -0.1, 0.2],
        dvector![0.2, 0.0],
    )
    .unwrap()
}

fn bench_grid_moments(c: &mut Criterion) {
    let spec = two_axis_spec();
    let policy = GridPolicy::default_for(2);
    let mut group = c.benchmark_group("grid_moments_512x512");
    for (name, mode) in [
        ("sequential", Parallelism::Sequential),
        ("parallel", Parallelism::Parallel),
    ] {
        group.bench_function(name, |b| {
            let psi = gaussian_wavefunction_with(&spec, &policy, mode).unwrap();
            b.iter(|| black_box(grid_moments_with(&psi, mode).unwrap()));
        });
    }
    group.finish();
}

fn bench_wavefunction_build(c: &mut Criterion) {
    let spec = two_axis_spec();
    let policy = GridPolicy::default_for(2);
    let mut group = c.benchmark_group("wavefunction_build_512x512");
    for (name, mode) in [
        ("sequential", Parallelism::Sequential),
        ("parallel", Parallelism::Parallel),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| black_box(gaussian_wavefunction_with(&spec, &policy, mode).unwrap()));
        });
    }
    group.finish();
}

fn bench_determinant_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("determinant_invariance_sweep_200");
    group.sample_size(10);
    for (name, mode) in [
        ("sequential", Parallelism::Sequential),
        ("parallel", Parallelism::Parallel),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                black_box(
                    determinant_invariance_max_deviation(17, 200, &[4, 5, 6], (0.5, 3.0), mode)
                        .unwrap(),
                )
            });
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_grid_moments,
    bench_wavefunction_build,
    bench_determinant_sweep
);
criterion_main!(benches);
