use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wiretap_core::channels::{QuantumChannel, ResourceState, WiretapChannel};
use wiretap_core::codesim::{run_experiment, SimConfig};
use wiretap_core::exec::Execution;
use wiretap_core::gallery;
use wiretap_core::optimize::{grid_oracle, optimize_unassisted, GridCaps, OptimizerConfig};
use wiretap_core::qcore::LabeledSpace;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn random_wiretap(seed: u64) -> WiretapChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = LabeledSpace::single("A", 2).unwrap();
    let output = LabeledSpace::new([("B", 2), ("E", 2)]).unwrap();
    WiretapChannel::from_channel(QuantumChannel::random(input, output, 2, &mut rng).unwrap()).unwrap()
}

fn restarts(c: &mut Criterion) {
    let n = random_wiretap(11);
    let mut group = c.benchmark_group("optimizer_restarts");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = OptimizerConfig { restarts: 8, max_iters: 40, execution, ..OptimizerConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(optimize_unassisted(&n, cfg).unwrap().best_value))
        });
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let n = random_wiretap(12);
    let res = ResourceState::trivial();
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(10);
    for (name, execution) in MODES {
        let caps = GridCaps { angles: 10, members: 2, simplex_steps: 8, execution };
        group.bench_with_input(BenchmarkId::from_parameter(name), &caps, |b, caps| {
            b.iter(|| black_box(grid_oracle(&n, &res, caps).unwrap()))
        });
    }
    group.finish();
}

fn codesim_trials(c: &mut Criterion) {
    let scenario = gallery::classical_wiretap().unwrap();
    let mut group = c.benchmark_group("codesim_trials");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = SimConfig { n: vec![4], trials: 32, execution, ..SimConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(run_experiment(&scenario, cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, restarts, grid, codesim_trials);
criterion_main!(benches);
