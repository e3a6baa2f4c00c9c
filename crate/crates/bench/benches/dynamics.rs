use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use peakon_core::dynamics::{GchRhs, GeneralRhs, PeakonSystem};
use peakon_core::field::mollified_peakons;
use peakon_core::*;
use peakon_bench::spread;

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    let general = GeneralRhs::new(Preset::Gch { p: 2 }.equation().unwrap());
    let closed = GchRhs { p: 2 };
    for n in [4, 16, 64] {
        let (a, b) = spread(n);
        group.bench_with_input(BenchmarkId::new("general_gch2", n), &n, |bench, _| {
            bench.iter(|| general.derivative(black_box(&a), black_box(&b)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("closed_gch2", n), &n, |bench, _| {
            bench.iter(|| closed.derivative(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn integration(c: &mut Criterion) {
    let sys = GeneralRhs::new(Preset::Ch.equation().unwrap());
    let (a, b) = spread(4);
    let s0 = PeakonState::new(0.0, a, b).unwrap();
    let cfg = IntegrationConfig::default();
    c.bench_function("integrate_ch_4_peakons_t10", |bench| {
        bench.iter(|| integrate(&sys, black_box(&s0), 10.0, &cfg).unwrap())
    });
}

fn symbolic(c: &mut Criterion) {
    let eq = Preset::Gmch { p: 3 }.equation().unwrap();
    c.bench_function("blowup_ab_gmch3", |bench| bench.iter(|| blowup_ab(black_box(&eq)).unwrap()));
}

fn field(c: &mut Criterion) {
    let eq = Preset::Ch.equation().unwrap();
    let solver = FieldSolver::new(&eq, 40.0, 1024).unwrap();
    let fs = mollified_peakons(40.0, 1024, &[1.0, 0.5], &[10.0, 20.0], 0.2).unwrap();
    c.bench_function("field_rhs_1024", |bench| bench.iter(|| solver.rhs(black_box(&fs.m)).unwrap()));
}

criterion_group!(benches, rhs, integration, symbolic, field);
criterion_main!(benches);
