use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tgeo_core::ensemble::step_hydrodynamics;
use tgeo_core::world_chain::{extend_chain, run_ensemble};
use tgeo_core::{ChainConfig, ChainState, EnsembleConfig};

fn chains(c: &mut Criterion) {
    c.bench_function("chain/extend", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = ChainState::new(1.0, 0.1, 0).unwrap();
        b.iter(|| extend_chain(black_box(&st), &mut rng))
    });
    let mut g = c.benchmark_group("chain/ensemble");
    g.sample_size(10);
    for chains in [100usize, 1000] {
        let cfg = ChainConfig::new(1.0, 0.1, 100, chains, 7);
        g.bench_with_input(BenchmarkId::from_parameter(chains), &cfg, |b, cfg| b.iter(|| run_ensemble(cfg)));
    }
    g.finish();
}

fn hydro(c: &mut Criterion) {
    let st = EnsembleConfig::default().initial_state().unwrap();
    let dt = st.cfl_bound();
    c.bench_function("hydro/step_481", |b| b.iter(|| step_hydrodynamics(black_box(&st), dt)));
}

criterion_group!(benches, chains, hydro);
criterion_main!(benches);
