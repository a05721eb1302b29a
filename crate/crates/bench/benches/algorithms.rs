use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use onalloc_core::harness::{gen_family, Family};
use onalloc_core::lp::{factor_revealing_lp, offline_opt};
use onalloc_core::{check_certificate, g_exponential, Algo, Builder, Precision, TiePolicy};

fn water_filling(c: &mut Criterion) {
    let mut group = c.benchmark_group("water-filling");
    for n in [10, 25, 50] {
        let inst = gen_family(&Family::Triangular { n }, 0).unwrap();
        group.bench_with_input(BenchmarkId::new("exact", n), &inst, |b, inst| {
            b.iter(|| Algo::WaterFilling.run(black_box(inst), Precision::Exact).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fast", n), &inst, |b, inst| {
            b.iter(|| Algo::WaterFilling.run(black_box(inst), Precision::Fast).unwrap())
        });
    }
    group.finish();
}

fn virtual_water_filling(c: &mut Criterion) {
    let algo = Algo::VirtualWaterFilling(g_exponential());
    let mut group = c.benchmark_group("virtual-wf");
    for (n, m) in [(4, 20), (8, 60)] {
        let inst = gen_family(&Family::random_onbap(n, m, 0.5), 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{m}")), &inst, |b, inst| {
            b.iter(|| algo.run(black_box(inst), Precision::Fast).unwrap())
        });
    }
    group.finish();
}

fn simplex(c: &mut Criterion) {
    let mut group = c.benchmark_group("simplex");
    group.sample_size(20);
    for (n, m) in [(4, 8), (6, 12)] {
        let inst = gen_family(&Family::random_onbap(n, m, 0.5), 2).unwrap();
        group.bench_with_input(BenchmarkId::new("offline-opt", format!("{n}x{m}")), &inst, |b, inst| {
            b.iter(|| offline_opt(black_box(inst)).unwrap())
        });
    }
    for k in [4, 8, 16] {
        group.bench_with_input(BenchmarkId::new("factor-revealing", k), &k, |b, &k| {
            b.iter(|| factor_revealing_lp(black_box(k)).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let g = g_exponential();
    let inst = gen_family(&Family::random_onbap(3, 6, 0.6), 3).unwrap();
    let mut group = c.benchmark_group("monte-carlo");
    group.sample_size(10);
    for trials in [1_000, 10_000] {
        group.bench_with_input(BenchmarkId::new("random-order", trials), &trials, |b, &trials| {
            let algo = Algo::Greedy(TiePolicy::ByIndex);
            b.iter(|| check_certificate(&inst, &algo, Builder::RandomOrder, trials, 7, &g).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, water_filling, virtual_water_filling, simplex, monte_carlo);
criterion_main!(benches);
