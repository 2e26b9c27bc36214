use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phasesynth::experiment::{run_exact, run_monte_carlo, ExperimentConfig};
use phasesynth::fock::{coherent_state, FockVector};
use phasesynth::optics::{
    compose, dft_transform, eight_port_network, evolve_sequential, evolve_with, permanent, Engine, EvolveOptions,
    MultiModeState,
};
use phasesynth::Complex64 as C64;

const FIG2: &str = include_str!("../../../presets/fig2.json");

fn bench_permanent(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    for n in [4usize, 6, 8, 10] {
        let m = dft_transform(n - 1).unwrap().matrix().clone();
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| permanent(black_box(m))));
    }
    group.finish();
}

fn bench_evolve(c: &mut Criterion) {
    let network = eight_port_network(0.3);
    let composed = compose(&network);
    let signal = coherent_state(C64::new(0.5, 0.0), 12).unwrap();
    let reference = coherent_state(C64::new(0.0, 1.0), 12).unwrap();
    let vac = FockVector::vacuum();
    let mut group = c.benchmark_group("evolve");
    for limit in [4usize, 8, 12] {
        let (input, _) = MultiModeState::product_truncated(&[&vac, &signal, &vac, &reference], limit);
        for engine in [Engine::Expansion, Engine::Submatrix] {
            let opts = EvolveOptions { photon_limit: limit, engine };
            group.bench_with_input(BenchmarkId::new(format!("{engine:?}"), limit), &input, |b, s| {
                b.iter(|| evolve_with(black_box(s), &composed, opts).unwrap())
            });
        }
        if limit <= 8 {
            group.bench_with_input(BenchmarkId::new("Sequential", limit), &input, |b, s| {
                b.iter(|| evolve_sequential(black_box(s), &network).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let config = ExperimentConfig::from_json(FIG2).unwrap();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("exact", |b| b.iter(|| run_exact(black_box(&config)).unwrap()));
    let mut mc = config.clone();
    mc.trials_per_setting = 100_000;
    group.bench_function("monte_carlo_1e5", |b| b.iter(|| run_monte_carlo(black_box(&mc)).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_permanent, bench_evolve, bench_sweep);
criterion_main!(benches);
