use std::hint::black_box;

use catlab::charsums::complete_sums;
use catlab::quantization::{propagator, trace_kelmer};
use catlab::variance::{variance_fourier, variance_quadrature};
use catlab::{Observable, PrimeContext, ToralAutomorphism, Window};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn ctx(n: u64) -> PrimeContext {
    PrimeContext::new(ToralAutomorphism::new(3, 2, 4, 3).unwrap(), n).unwrap()
}

fn traces(c: &mut Criterion) {
    let f = Observable::cos_x1();
    let mut group = c.benchmark_group("trace_kelmer");
    for n in [101u64, 1009, 1999] {
        let cx = ctx(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cx, |b, cx| {
            b.iter(|| trace_kelmer(cx, &f, black_box(1)).unwrap())
        });
    }
    group.finish();
}

fn propagators(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_propagator");
    group.sample_size(10);
    for n in [31u64, 101] {
        let cx = ctx(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cx, |b, cx| {
            b.iter(|| propagator(cx, black_box(1)))
        });
    }
    group.finish();
}

fn variances(c: &mut Criterion) {
    let f = Observable::cos_x1();
    let w = Window::hann();
    let mut group = c.benchmark_group("variance");
    group.sample_size(20);
    for n in [211u64, 1999] {
        let cx = ctx(n);
        let l = (n as f64)
            .powf(0.75)
            .floor()
            .min(2.0 * cx.order as f64 - 1.0);
        group.bench_with_input(BenchmarkId::new("fourier", n), &cx, |b, cx| {
            b.iter(|| variance_fourier(cx, &f, &w, black_box(l)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quadrature", n), &cx, |b, cx| {
            b.iter(|| variance_quadrature(cx, &f, &w, black_box(l)).unwrap())
        });
    }
    group.finish();
}

fn charsums(c: &mut Criterion) {
    let mut group = c.benchmark_group("complete_sums");
    for n in [101u64, 199] {
        let cx = ctx(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cx, |b, cx| {
            b.iter(|| complete_sums(cx, black_box([1, 0]), black_box([1, 1])).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, traces, propagators, variances, charsums);
criterion_main!(benches);
