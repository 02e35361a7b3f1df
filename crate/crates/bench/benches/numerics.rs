use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use powermix::mixture::{mixture_pdf_numeric, tsp_pdf_uniform};
use powermix::specfun::{euler_hyp2f1, hyp2f1_1_n, incomplete_beta, HyperParams};
use powermix::stieltjes::{lemma22_residual, mixture_stieltjes};
use powermix::verifier::ks_statistic;
use powermix::{ComplexPoint, DistributionSpec};
use powermix_bench::{beta_weighted, uniform01, uniform_arcsin, uniform_tsp};

fn special_functions(c: &mut Criterion) {
    let mut g = c.benchmark_group("specfun");
    g.bench_function("incomplete_beta", |b| {
        b.iter(|| incomplete_beta(black_box(0.37), black_box(2.5), black_box(7.0)))
    });
    for z in [0.5, 0.95] {
        g.bench_with_input(BenchmarkId::new("hyp2f1_1_n", z), &z, |b, &z| {
            b.iter(|| hyp2f1_1_n(black_box(2.5), z))
        });
    }
    g.bench_function("euler_hyp2f1", |b| {
        let p = HyperParams::new(1.0, 3.0, 4.0, 0.7).unwrap();
        b.iter(|| euler_hyp2f1(black_box(p)))
    });
    g.finish();
}

fn densities(c: &mut Criterion) {
    let mut g = c.benchmark_group("density");
    g.bench_function("closed_form_n2", |b| b.iter(|| tsp_pdf_uniform(2.0, black_box(0.3))));
    let spec = uniform_tsp(2.0);
    g.bench_function("quadrature_uniform_n2", |b| {
        b.iter(|| mixture_pdf_numeric(&spec, black_box(0.3)))
    });
    let spec = beta_weighted();
    g.bench_function("quadrature_beta_weight", |b| {
        b.iter(|| mixture_pdf_numeric(&spec, black_box(0.5)))
    });
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample");
    g.sample_size(20);
    let spec = uniform_tsp(2.0);
    g.bench_function("tsp_uniform_1e5", |b| b.iter(|| spec.sample_par(black_box(1), 100_000)));
    let spec = uniform_arcsin(2.0);
    g.bench_function("directed_arcsin_1e5", |b| b.iter(|| spec.sample_par(black_box(1), 100_000)));
    let draws = uniform_tsp(1.0).sample_par(3, 100_000);
    let u = uniform01();
    g.bench_function("ks_1e5", |b| b.iter(|| ks_statistic(black_box(&draws), |x| u.cdf(x))));
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("stieltjes");
    let arc = DistributionSpec::arcsin(-1.0, 1.0).unwrap();
    let z = ComplexPoint::new(0.5, 1.0);
    g.bench_function("closed_form_order3", |b| b.iter(|| arc.stieltjes(black_box(z), 3)));
    g.sample_size(10);
    let spec = uniform_arcsin(2.0);
    g.bench_function("mixture_order2", |b| {
        b.iter(|| mixture_stieltjes(&spec, black_box(ComplexPoint::real(2.0)), 2))
    });
    g.bench_function("derivative_relation", |b| {
        b.iter(|| lemma22_residual(&spec, black_box(z)))
    });
    g.finish();
}

criterion_group!(benches, special_functions, densities, sampling, transforms);
criterion_main!(benches);
