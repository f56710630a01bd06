use std::hint::black_box;

use cfwp_bench::{flat, four_dimensional, sample_mode, small_grid};
use cfwp_core::integrator::DEFAULT_REL_TOL;
use cfwp_core::verdict::classify_mode;
use cfwp_core::{
    check_all, coefficients, integrate, reparametrize, sweep, ParamBinding, RadialModel,
    ShootOptions, WarpExpr,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn expressions(c: &mut Criterion) {
    let p = ParamBinding::new().with("a", 1.0).with("b", 1.0);
    let text = "sqrt((a+b*t)/t)*(1+sqrt(t*(1+t))+log(sqrt(t)+sqrt(t+1)))";
    let e = WarpExpr::parse(text, &p.names()).unwrap();
    let f = p.bind(&e).unwrap();
    let df = f.derivative();
    c.bench_function("parse", |b| {
        b.iter(|| WarpExpr::parse(black_box(text), &p.names()).unwrap())
    });
    c.bench_function("eval", |b| b.iter(|| f.eval(black_box(0.37)).unwrap()));
    c.bench_function("eval derivative", |b| {
        b.iter(|| df.eval(black_box(0.37)).unwrap())
    });
}

fn geometry(c: &mut Criterion) {
    let g = four_dimensional();
    let mut group = c.benchmark_group("geometry");
    group.sample_size(10);
    group.bench_function("check_all", |b| b.iter(|| check_all(black_box(&g))));
    group.bench_function("reparametrize", |b| {
        b.iter(|| reparametrize(black_box(&g)).unwrap())
    });
    group.finish();
}

fn modes(c: &mut Criterion) {
    let coeffs = coefficients(&flat(), sample_mode()).unwrap();
    c.bench_function("integrate 1e-3..1e3", |b| {
        b.iter(|| integrate(&coeffs, 1e-3, 1e3, black_box([1.0, 0.5]), DEFAULT_REL_TOL).unwrap())
    });

    let model = RadialModel::new(four_dimensional()).unwrap();
    let opts = ShootOptions::default();
    let mut group = c.benchmark_group("verdict");
    group.sample_size(10);
    group.bench_function("classify_mode", |b| {
        b.iter(|| classify_mode(&model, black_box(sample_mode()), &opts).unwrap())
    });
    let grid = small_grid();
    group.bench_function("sweep 30 modes", |b| {
        b.iter(|| sweep(&model, black_box(&grid), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, expressions, geometry, modes);
criterion_main!(benches);
