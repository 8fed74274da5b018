use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use clmatch_core::generate::{generate, Family, GeneratorSpec, WeightMode};
use clmatch_core::tape::read_weights;
use clmatch_core::{extract_isolated_size_k, run_clp_match, Backend, LossyInstance, SolveMode};

fn instance(family: Family, n: usize, weights: WeightMode) -> clmatch_core::generate::GeneratedInstance {
    generate(&GeneratorSpec::new(family, n, weights, 17)).expect("generator accepts the spec")
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_perfect");
    for n in [3, 4, 5] {
        let inst = instance(Family::Complete, n, WeightMode::DistinctPowers);
        let weights = read_weights(&inst.tape, &inst.layout()).values().to_vec();
        for (name, backend) in [("det", Backend::Determinant), ("comb", Backend::Combinatorial)] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| extract_isolated_size_k(&inst.graph, n, black_box(&weights), backend).unwrap())
            });
        }
    }
    group.finish();
}

fn driver(c: &mut Criterion) {
    let mut group = c.benchmark_group("driver");
    group.sample_size(20);
    for n in [3, 5, 7] {
        for (name, family) in [("gnp", Family::RandomGnp), ("crafted", Family::CraftedNonisolating)] {
            let inst = instance(family, n, WeightMode::TapeRandom);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    let mut tape = inst.tape.clone();
                    run_clp_match(&inst.graph, &mut tape, &inst.config).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn lossy(c: &mut Criterion) {
    let inst = instance(Family::Complete, 2, WeightMode::TapeRandom);
    let lossy = LossyInstance::new(inst.graph).unwrap();
    c.bench_function("lossy_solve_k22_random", |b| {
        b.iter(|| clmatch_core::lossy_solve(&lossy, SolveMode::Random, 50, black_box(3)).unwrap())
    });
}

criterion_group!(benches, extraction, driver, lossy);
criterion_main!(benches);
