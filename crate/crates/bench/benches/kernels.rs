use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hyperalg::algdep::{find_relation, parse_poly};
use hyperalg::expsum::{apply_operator, mul};
use hyperalg::geometry::{check_hull_condition, trace_level_curve};
use hyperalg::{ExpSum, Symbol, C64};

fn sample(n: usize, shift: f64) -> ExpSum {
    ExpSum::from_pairs((0..n).map(|j| {
        let t = j as f64 + shift;
        (C64::new(1.0 / (1.0 + t), 0.5), C64::from_polar(1.0 + 0.01 * t, 0.37 * t))
    }))
}

fn expsum_kernels(c: &mut Criterion) {
    let f = sample(64, 0.0);
    let g = sample(64, 0.5);
    c.bench_function("mul_64x64", |b| b.iter(|| mul(black_box(&f), black_box(&g))));
    let phi: Symbol = "poly:0.5,-1,1".parse().unwrap();
    let fg = mul(&f, &g);
    c.bench_function("apply_operator_n64", |b| b.iter(|| apply_operator(black_box(&phi), black_box(&fg), 64)));
}

fn relation_kernel(c: &mut Criterion) {
    let polys = ["t1^2 + t2", "t1*t2", "t2^2 - t1"].map(|s| parse_poly(s, Some(2)).unwrap());
    c.bench_function("find_relation_3_in_2", |b| b.iter(|| find_relation(black_box(&polys)).unwrap()));
}

fn geometry_kernels(c: &mut Criterion) {
    let id = Symbol::identity();
    c.bench_function("trace_unit_circle", |b| {
        b.iter(|| trace_level_curve(black_box(&id), 1.0, C64::new(0.0, 1.0), 0.01, 700).unwrap())
    });
    let arc = trace_level_curve(&id, 1.0, C64::new(0.0, 1.0), 0.01, 60).unwrap();
    c.bench_function("hull_condition_density_40", |b| b.iter(|| check_hull_condition(black_box(&id), &arc, 40)));
}

criterion_group!(benches, expsum_kernels, relation_kernel, geometry_kernels);
criterion_main!(benches);
