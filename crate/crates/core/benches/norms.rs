use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gowers_core::constructions::quadratic_correlation_scan;
use gowers_core::progressions::{lambda3_via_fourier, lambda_k};
use gowers_core::ring::{dft, dft_naive};
use gowers_core::uniformity::{gowers_norm_naive, gowers_norm_recursive};
use gowers_core::{par, Complex64, CyclicFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit(m: usize, seed: u64) -> CyclicFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..m)
        .map(|_| Complex64::from_polar(rng.random_range(0.0..=1.0), std::f64::consts::TAU * rng.random_range(0.0..1.0)))
        .collect();
    CyclicFunction::new(values).unwrap()
}

fn gowers(c: &mut Criterion) {
    let mut g = c.benchmark_group("gowers_u3");
    for m in [16usize, 32, 64] {
        let f = random_unit(m, 1);
        g.bench_with_input(BenchmarkId::new("naive", m), &f, |b, f| b.iter(|| gowers_norm_naive(f, 3).unwrap()));
        g.bench_with_input(BenchmarkId::new("recursive", m), &f, |b, f| b.iter(|| gowers_norm_recursive(f, 3).unwrap()));
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("dft");
    for m in [257usize, 1024, 2003] {
        let f = random_unit(m, 2);
        g.bench_with_input(BenchmarkId::new("naive", m), &f, |b, f| b.iter(|| dft_naive(f)));
        g.bench_with_input(BenchmarkId::new("fft", m), &f, |b, f| b.iter(|| dft(f)));
    }
    g.finish();
}

fn lambda3(c: &mut Criterion) {
    let mut g = c.benchmark_group("lambda3");
    for m in [101usize, 501] {
        let fs = [random_unit(m, 3), random_unit(m, 4), random_unit(m, 5)];
        g.bench_with_input(BenchmarkId::new("direct", m), &fs, |b, fs| b.iter(|| lambda_k(fs).unwrap()));
        g.bench_with_input(BenchmarkId::new("fourier", m), &fs, |b, fs| {
            b.iter(|| lambda3_via_fourier(&fs[0], &fs[1], &fs[2]).unwrap())
        });
    }
    g.finish();
}

/// Same workloads on one worker and on the default pool. Without the
/// `parallel` feature both rows measure the sequential fallback.
fn threads(c: &mut Criterion) {
    let mut g = c.benchmark_group("threads");
    g.sample_size(10);
    let f = random_unit(48, 6);
    let q = random_unit(1201, 7);
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    for (label, n) in [("sequential", 1usize), ("parallel", all)] {
        g.bench_function(BenchmarkId::new("gowers_u3_naive_48", label), |b| {
            b.iter(|| par::with_threads(n, || gowers_norm_naive(&f, 3).unwrap()))
        });
        g.bench_function(BenchmarkId::new("quadratic_scan_1201", label), |b| {
            b.iter(|| par::with_threads(n, || quadratic_correlation_scan(&q).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, gowers, transforms, lambda3, threads);
criterion_main!(benches);
