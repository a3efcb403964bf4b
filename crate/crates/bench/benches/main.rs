//! Benchmarks for the hot paths: exact degree growth, intersection products,
//! certified spectral radii, invariant-pair extraction, Green iteration, and
//! Monte Carlo wedge pairings.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use pseudodyn_core::maps::compound_matrix;
use pseudodyn_core::rational::rat_int;
use pseudodyn_core::spectral::perron_pair_cesaro;
use pseudodyn_core::{
    catalog_map, cesaro_means, degree_sequence, green_iterate, involution_experiment, pair_left,
    slice_experiment, spectral_radius, triple,
};

fn bench_exact(c: &mut Criterion) {
    let j = catalog_map("cremona_j").unwrap();
    let action = j.action.clone().unwrap();
    let space = action.space.clone();
    let mut group = c.benchmark_group("exact");

    group.bench_function("degree_sequence cremona n=6", |b| {
        b.iter(|| degree_sequence(black_box(&j), 6).unwrap())
    });

    let a0 = space.hyperplane();
    group.bench_function("triple product on the blowup", |b| {
        b.iter(|| triple(black_box(&a0), black_box(&a0), black_box(&a0)).unwrap())
    });

    let circulant = [[1, 1, 0], [0, 1, 1], [1, 0, 1]];
    group.bench_function("certified spectral radius", |b| {
        b.iter(|| spectral_radius(black_box(&compound_matrix(&circulant, 1))))
    });

    group.bench_function("perron pair via Cesaro, 64 terms", |b| {
        b.iter(|| perron_pair_cesaro(black_box(&action), 64).unwrap())
    });

    let v0: Vec<_> = (0..action.m11.dim())
        .map(|i| rat_int((i == 0) as i64))
        .collect();
    group.bench_function("cesaro means, 200 terms", |b| {
        b.iter(|| cesaro_means(black_box(&action.m11), &v0, &rat_int(1), 200).unwrap())
    });

    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let squaring = catalog_map("squaring").unwrap();
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.measurement_time(Duration::from_secs(8));

    group.bench_function("green iterate N=8, 64 samples", |b| {
        b.iter(|| green_iterate(black_box(&squaring), 2.0, 8, 64, 7).unwrap())
    });

    let slice = slice_experiment(2000, 1);
    group.bench_function("slice pairing, 2000 samples", |b| {
        b.iter(|| pair_left(black_box(&slice), 0.16).unwrap())
    });

    let involution = involution_experiment(1000, 1);
    group.bench_function("involution pairing, 1000 samples", |b| {
        b.iter(|| pair_left(black_box(&involution), 0.1).unwrap())
    });

    group.finish();
}

criterion_group!(benches, bench_exact, bench_monte_carlo);
criterion_main!(benches);
