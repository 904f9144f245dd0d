use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;

use hanabi_qd_bench::reference_chromosome;
use hanabi_qd_core::elites::{fitness, EvolutionConfig, Evolver};
use hanabi_qd_core::engine::{GameConfig, GameState, PlayerView};
use hanabi_qd_core::rules::{agent_act, playability, Chromosome, RuleCatalog};
use hanabi_qd_core::seed::{rng_from, seed_list, Stream};

fn engine(c: &mut Criterion) {
    let config = GameConfig::two_player();
    c.bench_function("deal", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            GameState::new(config, black_box(seed)).unwrap()
        })
    });
    let state = GameState::new(config, 3).unwrap();
    c.bench_function("legal_actions", |b| {
        b.iter(|| PlayerView::new(black_box(&state), &[], 0).legal_actions().unwrap())
    });
}

fn rules(c: &mut Criterion) {
    let catalog = RuleCatalog::standard();
    let chromosome = reference_chromosome(&catalog);
    let state = GameState::new(GameConfig::two_player(), 11).unwrap();
    let viewer = state.current_player();
    c.bench_function("playability", |b| {
        let view = PlayerView::new(&state, &[], viewer);
        b.iter(|| playability(black_box(&view), 2))
    });
    c.bench_function("agent_act", |b| {
        let view = PlayerView::new(&state, &[], viewer);
        let mut rng = rng_from(1);
        b.iter(|| agent_act(&catalog, &chromosome, black_box(&view), &mut rng))
    });
}

fn evaluation(c: &mut Criterion) {
    let catalog = RuleCatalog::standard();
    let chromosome = reference_chromosome(&catalog);
    let seeds = seed_list(5, Stream::Evaluation, 0, 100);
    let mut group = c.benchmark_group("fitness");
    group.throughput(Throughput::Elements(seeds.len() as u64));
    group.sample_size(20);
    group.bench_function("100_games", |b| {
        b.iter(|| fitness(&catalog, black_box(&chromosome), &seeds, GameConfig::two_player()).unwrap())
    });
    group.bench_function("random_chromosome_100_games", |b| {
        let mut rng = rng_from(9);
        b.iter_batched(
            || Chromosome::random(15, catalog.len(), &mut rng),
            |ch| fitness(&catalog, &ch, &seeds, GameConfig::two_player()).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();

    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    group.bench_function("200_candidates_20_games", |b| {
        let config = EvolutionConfig {
            total_candidates: 200,
            random_phase: 50,
            games_per_eval: 20,
            checkpoint_every: 0,
            ..EvolutionConfig::default()
        };
        b.iter(|| {
            let mut ev = Evolver::new(config.clone(), &catalog).unwrap();
            ev.run_to_end().unwrap();
            ev.archive().coverage()
        })
    });
    group.finish();
}

criterion_group!(benches, engine, rules, evaluation);
criterion_main!(benches);
