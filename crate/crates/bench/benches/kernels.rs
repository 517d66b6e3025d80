use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hyperflow_bench::{gauss_speed, offcenter_field, offcenter_state};
use hyperflow_core::flow::{adaptive_dt, step, StepControl};
use hyperflow_core::geometry::build_jet;
use hyperflow_core::{CurvatureFunction, PrincipalCurvatures};

fn jet(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_jet");
    for nodes in [64, 256, 1024] {
        let field = offcenter_field(2, nodes);
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &field, |b, f| {
            b.iter(|| build_jet(black_box(f)))
        });
    }
    g.finish();
}

fn rk4(c: &mut Criterion) {
    let mut g = c.benchmark_group("rk4_step");
    let speed = gauss_speed(2, 1.5);
    let control = StepControl::new(0.25, 1.0).unwrap();
    for nodes in [64, 256] {
        let state = offcenter_state(2, nodes);
        let dt = adaptive_dt(&state, &speed, &control).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &state, |b, s| {
            b.iter(|| step(black_box(s), &speed, dt).unwrap())
        });
    }
    g.finish();
}

fn eval_f(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval_F");
    for n in [2, 4, 8] {
        let f = CurvatureFunction::new(n, 0.5 / n as f64).unwrap();
        let k = PrincipalCurvatures::new((1..=n).map(|i| 0.5 + i as f64).collect()).unwrap();
        g.bench_with_input(BenchmarkId::new("eval", n), &k, |b, k| b.iter(|| f.eval(black_box(k)).unwrap()));
        g.bench_with_input(BenchmarkId::new("gradient", n), &k, |b, k| {
            b.iter(|| f.gradient(black_box(k)).unwrap())
        });
    }
    g.bench_function("axisymmetric", |b| {
        let f = CurvatureFunction::gauss(3).unwrap();
        b.iter(|| f.eval_axisymmetric(black_box(1.3), black_box(1.1)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, jet, rk4, eval_f);
criterion_main!(benches);
