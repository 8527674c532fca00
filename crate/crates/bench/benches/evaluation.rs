use std::hint::black_box;

use bgamma::inversion::{self, InversionConfig};
use bgamma::simulate::{sample_functional, PathSampler};
use bgamma::{BernsteinFunction, BernsteinGamma, LevyExponent, MellinLaw, Measure};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64 as C;

fn two_sided() -> LevyExponent {
    LevyExponent::new(0.5, 0.3, 0.1, Measure::exponential(1.0, 2.0), Measure::exponential(2.0, 3.0)).unwrap()
}

fn w_phi(c: &mut Criterion) {
    let phi = BernsteinFunction::new(0.5, 1.0, Measure::exponential(1.0, 2.0)).unwrap();
    let w = BernsteinGamma::new(phi).unwrap();
    c.bench_function("w_phi/moderate", |b| b.iter(|| w.eval(black_box(C::new(2.5, 3.0))).unwrap()));
    c.bench_function("w_phi/large_imaginary", |b| b.iter(|| w.eval(black_box(C::new(0.7, 200.0))).unwrap()));
}

fn mellin(c: &mut Criterion) {
    let law = MellinLaw::new(&two_sided()).unwrap();
    c.bench_function("mellin/eval", |b| b.iter(|| law.eval(black_box(C::new(0.6, 10.0))).unwrap()));
    c.bench_function("mellin/construct", |b| b.iter(|| MellinLaw::new(black_box(&two_sided())).unwrap()));
}

fn law(c: &mut Criterion) {
    let law = MellinLaw::new(&LevyExponent::brownian(1.0, 0.5, 0.5)).unwrap();
    let cfg = InversionConfig::default();
    let mut g = c.benchmark_group("inversion");
    g.sample_size(20);
    g.bench_function("cdf", |b| b.iter(|| inversion::cdf(&law, black_box(0.8), &cfg).unwrap()));
    g.bench_function("density", |b| b.iter(|| inversion::density(&law, black_box(0.8), 0, &cfg).unwrap()));
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let s = PathSampler::new(two_sided(), 1);
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.bench_function("functional_1000_paths", |b| b.iter(|| sample_functional(&s, 1_000).unwrap()));
    g.finish();
}

criterion_group!(benches, w_phi, mellin, law, sampling);
criterion_main!(benches);
