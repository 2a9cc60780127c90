use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lift_spectra::{catalog, dense_lift_spectrum, lambda_new, random_lift};
use lift_spectra_bench::{fixture, size_2000};

fn adjacency_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("adjacency_apply");
    for (name, h) in size_2000() {
        let x: Vec<f64> = (0..h.order()).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; h.order()];
        group.bench_function(name, |b| b.iter(|| h.adjacency_apply_into(black_box(&x), &mut y).unwrap()));
    }
    group.finish();
}

fn lift_construction(c: &mut Criterion) {
    let g = catalog("petersen").unwrap();
    c.bench_function("random_lift petersen n=200", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            random_lift(&g, 200, black_box(seed)).unwrap()
        })
    });
}

fn second_eigenvalue(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_new");
    group.sample_size(10);
    for (name, h) in size_2000() {
        group.bench_function(name, |b| b.iter(|| lambda_new(black_box(&h)).unwrap()));
    }
    group.finish();
}

fn dense_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_spectrum");
    group.sample_size(10);
    for n in [10usize, 25, 50] {
        let h = fixture("petersen", n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(h.order()), &h, |b, h| {
            b.iter(|| dense_lift_spectrum(h).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, adjacency_apply, lift_construction, second_eigenvalue, dense_spectrum);
criterion_main!(benches);
