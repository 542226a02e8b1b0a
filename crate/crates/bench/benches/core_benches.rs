use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fraclim_core::covers::verify_levels;
use fraclim_core::limitfn::{a_exact, lambda_rho};
use fraclim_core::{box_count, build_family, builtin, verify_quasilinear, BAdicPoint, CoverMeasure, Instance};
use num_bigint::BigInt;
use num_rational::BigRational;

fn sequences(c: &mut Criterion) {
    let rho = builtin("rho").unwrap();
    let mut g = c.benchmark_group("seq");
    for n in [10_000usize, 1_000_000] {
        g.bench_with_input(BenchmarkId::new("rho_table", n), &n, |b, &n| {
            b.iter(|| black_box(rho.table(n).unwrap()))
        });
    }
    g.bench_function("rho_eval_point", |b| {
        b.iter(|| rho.eval(black_box(123_456_789_012u128)).unwrap())
    });
    g.finish();
}

fn limit_functions(c: &mut Criterion) {
    let rho = builtin("rho").unwrap();
    let x = BAdicPoint::new(4, 0x002d_4c91_u64, 12).unwrap();
    let eps = BigRational::new(BigInt::from(1), BigInt::from(1u64 << 30));
    c.bench_function("a_exact_depth12", |b| b.iter(|| a_exact(&rho, black_box(&x)).unwrap()));
    c.bench_function("lambda_rho_2^-30", |b| {
        b.iter(|| lambda_rho(&rho, black_box(&x), &eps).unwrap())
    });
}

fn covers(c: &mut Criterion) {
    let rho = Instance::named("rho").unwrap();
    let tm = Instance::named("tm_sum").unwrap();
    let mut g = c.benchmark_group("covers");
    g.sample_size(10);
    for n in [6u32, 8] {
        g.bench_with_input(BenchmarkId::new("build_f", n), &n, |b, &n| {
            b.iter(|| build_family(&rho.model, n).unwrap())
        });
    }
    g.bench_function("verify_f_1..6", |b| b.iter(|| verify_levels(&rho.model, 1, 7).unwrap()));
    g.bench_function("verify_e_tm_1..10", |b| {
        b.iter(|| verify_levels(&tm.model, 1, 11).unwrap())
    });
    g.finish();
}

fn dimension_and_measure(c: &mut Criterion) {
    let rho = Instance::named("rho").unwrap();
    let u = BAdicPoint::new(4, 1u32, 1).unwrap();
    let v = BAdicPoint::new(4, 2u32, 1).unwrap();
    let mu = CoverMeasure::new(rho.model.clone(), 2, 5).unwrap();
    let mut g = c.benchmark_group("geometry");
    g.sample_size(10);
    g.bench_function("box_count_rho_n6_p3", |b| {
        b.iter(|| box_count(&rho.model, &u, &v, 6, 3).unwrap())
    });
    g.bench_function("mdp_rho_levels3..6_200", |b| {
        b.iter(|| mu.mdp_scan(1.5, 3, 6, 200, 42).unwrap())
    });
    g.finish();
}

fn quasilinear(c: &mut Criterion) {
    let tm = builtin("tm_sum").unwrap();
    let one = BigRational::from_integer(BigInt::from(1));
    let zero = BigRational::from_integer(BigInt::from(0));
    let mut g = c.benchmark_group("quasilinear");
    g.sample_size(10);
    g.bench_function("verify_tm_sum_1e5", |b| {
        b.iter(|| verify_quasilinear(&tm, &one, &zero, 100_000).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    sequences,
    limit_functions,
    covers,
    dimension_and_measure,
    quasilinear
);
criterion_main!(benches);
