use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use twistsym_bench::{dense_identity, oscillator, scaling_field};
use twistsym_core::expr::{is_zero, parse};
use twistsym_core::numcheck::rk4_integrate;
use twistsym_core::prolong::{lambda_prolong, standard_prolong};

fn bench_prolongation(c: &mut Criterion) {
    let (ctx, _) = oscillator();
    let field = scaling_field(&ctx);
    let t = ctx.table().clone();
    let lambda = parse("u_x", &t).unwrap();
    c.bench_function("standard_prolong_order4", |b| {
        b.iter(|| standard_prolong(&ctx, black_box(&field), 4).unwrap())
    });
    c.bench_function("lambda_prolong_order4", |b| {
        b.iter(|| lambda_prolong(&ctx, black_box(&field), &lambda, 4).unwrap())
    });
}

fn bench_zero_test(c: &mut Criterion) {
    let (ctx, _) = oscillator();
    let identity = dense_identity(&ctx);
    c.bench_function("is_zero_dense_identity", |b| {
        b.iter(|| is_zero(black_box(&identity)))
    });
}

fn bench_rk4(c: &mut Criterion) {
    let (ctx, eq) = oscillator();
    c.bench_function("rk4_oscillator_1000_steps", |b| {
        b.iter(|| rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.0], 0.01, 10.0).unwrap())
    });
    let energy = parse("(u_x^2 + u^2)/2", ctx.table()).unwrap();
    let traj = rk4_integrate(&ctx, &eq, 0.0, &[1.0, 0.0], 0.01, 10.0).unwrap();
    c.bench_function("sample_energy_along_trajectory", |b| {
        b.iter(|| traj.sample(black_box(&energy)).unwrap())
    });
}

criterion_group!(benches, bench_prolongation, bench_zero_test, bench_rk4);
criterion_main!(benches);
