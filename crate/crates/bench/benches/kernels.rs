use std::hint::black_box;

use cp3::ambient::random_sphere_point;
use cp3::catalog;
use cp3::connection::{g_closed, g_numeric, ConnectionConfig};
use cp3::curvature::{riemann_closed_vec, riemann_numeric_vec, CurvatureMode};
use cp3::hopf::random_horizontal;
use cp3::isometry::sample_rng;
use cp3::lagrangian::analyze;
use criterion::{criterion_group, criterion_main, Criterion};

fn kernels(c: &mut Criterion) {
    let q = random_sphere_point(3);
    let mut rng = sample_rng(3, 0);
    let [x, y, z] = [0; 3].map(|_| random_horizontal(&mut rng, &q).vec);
    let q = *q.vec();
    let cfg = ConnectionConfig::default();

    c.bench_function("g_closed", |b| b.iter(|| g_closed(black_box(&q), black_box(&x), black_box(&y))));
    c.bench_function("g_numeric", |b| b.iter(|| g_numeric(black_box(&q), black_box(&x), black_box(&y), &cfg)));
    c.bench_function("riemann_closed a=2", |b| b.iter(|| riemann_closed_vec(2.0, black_box(&q), &x, &y, &z)));
    c.bench_function("riemann_numeric direct a=2", |b| {
        b.iter(|| riemann_numeric_vec(2.0, black_box(&q), &x, &y, &z, &cfg, CurvatureMode::Direct))
    });

    let ehl = catalog::ehl().immersion;
    let u = ehl.admissible_samples(1, 1).unwrap()[0];
    c.bench_function("analyze ehl", |b| b.iter(|| analyze(&ehl, black_box(&u), &cfg).unwrap()));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
