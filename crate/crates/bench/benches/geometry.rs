use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tgeo_bench::timelike_points;
use tgeo_core::equivalence::{solve_equivalent_timelike, solve_skeleton_equivalence, SolverConfig, TimelikeCase};
use tgeo_core::vector_algebra::{gram_matrix, Skeleton};
use tgeo_core::{PairVector, Point, WorldFunctionSpec};

fn world_function(c: &mut Criterion) {
    let pts = timelike_points(1, 4);
    let d = WorldFunctionSpec::distorted(4, 0.01);
    let m = WorldFunctionSpec::minkowski(4);
    c.bench_function("sigma/distorted", |b| b.iter(|| d.sigma(black_box(&pts[0]), black_box(&pts[3]))));
    c.bench_function("sigma/minkowski", |b| b.iter(|| m.sigma(black_box(&pts[0]), black_box(&pts[3]))));
    let v1 = PairVector::new(pts[0].clone(), pts[1].clone());
    let v2 = PairVector::new(pts[2].clone(), pts[3].clone());
    c.bench_function("scalar_product/distorted", |b| b.iter(|| d.scalar_product(black_box(&v1), black_box(&v2))));
    let sk = Skeleton::new(pts).unwrap();
    c.bench_function("gram/distorted_n3", |b| b.iter(|| gram_matrix(&d, black_box(&sk))));
}

fn solvers(c: &mut Criterion) {
    let d = WorldFunctionSpec::distorted_lambda(0.1);
    c.bench_function("solve/closed_form_case_I", |b| {
        b.iter(|| solve_equivalent_timelike(&d, 1.0, black_box(0.5), 0.2, [0.0, 0.0, 1.0], TimelikeCase::I))
    });
    let spec = WorldFunctionSpec::distorted(4, 0.01);
    let p1 = Point::from([1.0, 0.0, 0.0, 0.0]);
    let sk = Skeleton::new(vec![Point::origin(4), p1.clone()]).unwrap();
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("numeric_single_link", |b| b.iter(|| solve_skeleton_equivalence(&spec, &sk, &p1, &cfg)));
    g.finish();
}

criterion_group!(benches, world_function, solvers);
criterion_main!(benches);
