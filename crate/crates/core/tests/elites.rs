use hanabi_qd_core::elites::{
    fitness, generation_seeds, new_chromosome, reevaluate, run, Archive, ArchiveEntry, Evaluated, EvolutionConfig,
    EvolveError, Evolver, Placement,
};
use hanabi_qd_core::engine::GameConfig;
use hanabi_qd_core::metrics::{niche, BehaviorDescriptor, NicheIndex};
use hanabi_qd_core::rules::{Chromosome, Gate, RuleCatalog, RuleKind, CHROMOSOME_LEN};
use hanabi_qd_core::seed::{seed_list, Stream};

fn small(total: u64, seed: u64) -> EvolutionConfig {
    EvolutionConfig {
        total_candidates: total,
        random_phase: total / 3,
        games_per_eval: 8,
        master_seed: seed,
        checkpoint_every: 50,
        ..EvolutionConfig::default()
    }
}

fn ids(cat: &RuleCatalog, kinds: &[RuleKind]) -> Chromosome {
    let mut genes: Vec<u16> = kinds.iter().map(|&k| cat.find(k, Gate::Always).unwrap().0).collect();
    let last = *genes.last().unwrap();
    genes.resize(CHROMOSOME_LEN, last);
    Chromosome::from_ids(&genes, cat).unwrap()
}

/// Never plays: discards when allowed, hints otherwise.
fn discarder(cat: &RuleCatalog) -> Chromosome {
    ids(cat, &[RuleKind::DiscardOldest, RuleKind::TellRandomly])
}

fn decent(cat: &RuleCatalog) -> Chromosome {
    ids(
        cat,
        &[
            RuleKind::PlayIfCertain,
            RuleKind::PlayProbability { tenths: 6 },
            RuleKind::TellAboutPlayableCard,
            RuleKind::DiscardUseless,
            RuleKind::TellAboutOnes,
            RuleKind::DiscardOldestUnhinted,
            RuleKind::DiscardOldest,
            RuleKind::TellMostInformation,
        ],
    )
}

#[test]
fn random_phase_draws_uniform_genes() {
    let cat = RuleCatalog::standard();
    let archive = Archive::new(small(100, 1), cat.hash());
    let c = new_chromosome(&archive, 0, cat.len());
    assert_eq!(c.len(), CHROMOSOME_LEN);
    assert!(c.genes().iter().all(|g| (g.0 as usize) < cat.len()));
    assert_eq!(new_chromosome(&archive, 0, cat.len()), c);
    assert_ne!(new_chromosome(&archive, 1, cat.len()), c);
    // An empty archive falls back to uniform draws after the random phase too.
    let late = new_chromosome(&archive, 90, cat.len());
    assert_eq!(late.len(), CHROMOSOME_LEN);
}

fn single_elite_archive(config: EvolutionConfig, cat: &RuleCatalog) -> (Archive, Chromosome) {
    let parent = decent(cat);
    let mut archive = Archive::new(config.clone(), cat.hash());
    let seeds = generation_seeds(&config, 0);
    let r = fitness(cat, &parent, &seeds, config.game).unwrap();
    archive
        .insert_entry(ArchiveEntry {
            chromosome: parent.clone(),
            fitness: r.mean(),
            descriptor: r.descriptor().unwrap(),
            stats: r.stats,
            eval_seeds: seeds,
            games_played: 8,
        })
        .unwrap();
    (archive, parent)
}

#[test]
fn variation_without_mutation_or_crossover_copies_parent() {
    let cat = RuleCatalog::standard();
    let config = EvolutionConfig { mutation_rate: 0.0, crossover_probability: 0.0, random_phase: 0, ..small(100, 3) };
    let (archive, parent) = single_elite_archive(config, &cat);
    for g in 0..20 {
        assert_eq!(new_chromosome(&archive, g, cat.len()), parent);
    }
}

#[test]
fn full_mutation_ignores_parent() {
    let cat = RuleCatalog::standard();
    let config = EvolutionConfig { mutation_rate: 1.0, crossover_probability: 0.0, random_phase: 0, ..small(100, 3) };
    let (archive, parent) = single_elite_archive(config, &cat);
    let mut same = 0;
    let trials = 400;
    for g in 0..trials {
        let child = new_chromosome(&archive, g, cat.len());
        same += child.genes().iter().zip(parent.genes()).filter(|(a, b)| a == b).count();
    }
    // Expected matches per gene under independence: 1 / 139.
    let rate = same as f64 / (trials as f64 * CHROMOSOME_LEN as f64);
    assert!(rate < 0.02, "{rate}");
}

#[test]
fn discarder_scores_zero_and_is_rejected() {
    let cat = RuleCatalog::standard();
    let config = small(10, 0);
    let seeds = generation_seeds(&config, 0);
    let r = fitness(&cat, &discarder(&cat), &seeds, config.game).unwrap();
    assert_eq!(r.mean(), 0.0);
    assert_eq!(r.stats.cards_played, 0);
    assert!(r.descriptor().is_none());
    let mut archive = Archive::new(config.clone(), cat.hash());
    let e = Evaluated::evaluate(&cat, discarder(&cat), seeds, config.game).unwrap();
    assert_eq!(archive.try_insert(&cat, e).unwrap(), Placement::RejectedFitness);
    assert!(archive.is_empty());
}

#[test]
fn fitness_is_deterministic_and_pools_both_seats() {
    let cat = RuleCatalog::standard();
    let seeds = seed_list(5, Stream::Evaluation, 0, 20);
    let a = fitness(&cat, &decent(&cat), &seeds, GameConfig::two_player()).unwrap();
    let b = fitness(&cat, &decent(&cat), &seeds, GameConfig::two_player()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.summary.n, 20);
    assert!(a.mean() > 5.0, "{}", a.mean());
    assert!(a.stats.is_consistent());
}

#[test]
fn insertion_rules() {
    let cat = RuleCatalog::standard();
    let config = small(10, 0);
    let mut archive = Archive::new(config.clone(), cat.hash());
    let seeds = generation_seeds(&config, 0);
    let c = Evaluated::evaluate(&cat, decent(&cat), seeds.clone(), config.game).unwrap();
    let n = niche(&c.result.descriptor().unwrap(), 20);
    assert_eq!(archive.try_insert(&cat, c.clone()).unwrap(), Placement::Inserted(n));
    assert_eq!(archive.coverage(), 1);

    // Equal score on the same seeds keeps the incumbent.
    match archive.try_insert(&cat, c.clone()).unwrap() {
        Placement::Kept { niche, incumbent } => {
            assert_eq!(niche, n);
            assert_eq!(incumbent, c.result.mean());
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(archive.get(n).unwrap().games_played, 16);

    // A strictly better candidate (fabricated result) replaces it.
    let mut better = c.clone();
    better.result.summary.mean += 1.0;
    better.chromosome = ids(&cat, &[RuleKind::PlayIfCertain, RuleKind::DiscardOldest]);
    match archive.try_insert(&cat, better.clone()).unwrap() {
        Placement::Replaced { niche, .. } => assert_eq!(niche, n),
        other => panic!("{other:?}"),
    }
    let stored = archive.get(n).unwrap();
    assert_eq!(stored.chromosome, better.chromosome);
    assert_eq!(stored.eval_seeds, seeds);
    assert_eq!(stored.fitness, better.result.mean());
}

#[test]
fn zero_generations_gives_empty_archive() {
    let cat = RuleCatalog::standard();
    let archive = run(small(0, 1), &cat).unwrap();
    assert!(archive.is_empty());
    assert_eq!(archive.generation(), 0);
}

#[test]
fn run_keeps_invariants_and_monotone_cells() {
    let cat = RuleCatalog::standard();
    let mut ev = Evolver::new(small(300, 9), &cat).unwrap();
    let mut coverage = 0;
    let mut best = std::collections::HashMap::new();
    while ev.archive().generation() < 300 {
        let placement = ev.step().unwrap();
        let a = ev.archive();
        assert!(a.coverage() >= coverage);
        coverage = a.coverage();
        if let Placement::Kept { niche, incumbent } | Placement::Replaced { niche, incumbent } = placement {
            // Stored fitness is at least the paired re-evaluation of the incumbent.
            let stored = a.get(niche).unwrap();
            if stored.eval_seeds == generation_seeds(a.config(), a.generation() - 1) {
                assert!(stored.fitness >= incumbent);
            }
        }
        for (n, e) in a.occupied() {
            best.insert(n, e.fitness);
        }
    }
    assert!(ev.monitor().violations.is_empty());
    assert!(ev.monitor().paired_checks > 0);
    assert_eq!(ev.monitor().candidates, 300);
    ev.archive().check_invariants().unwrap();
    assert!(coverage > 10);
}

#[test]
fn stored_evaluation_reproduces_cell() {
    let cat = RuleCatalog::standard();
    let archive = run(small(300, 4), &cat).unwrap();
    for (n, e) in archive.occupied() {
        let r = fitness(&cat, &e.chromosome, &e.eval_seeds, archive.config().game).unwrap();
        assert_eq!(r.mean(), e.fitness);
        assert_eq!(r.descriptor().unwrap(), e.descriptor);
        assert_eq!(niche(&e.descriptor, archive.bins()), n);
    }
}

#[test]
fn single_threaded_runs_are_reproducible() {
    let cat = RuleCatalog::standard();
    let a = run(small(200, 21), &cat).unwrap();
    let b = run(small(200, 21), &cat).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let c = run(small(200, 22), &cat).unwrap();
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn resume_from_checkpoint_matches_uninterrupted_run() {
    let cat = RuleCatalog::standard();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checkpoint.json");
    let full = run(small(300, 13), &cat).unwrap();

    let mut first = Evolver::new(small(300, 13), &cat).unwrap().with_checkpoint(&path);
    first.run_until(170).unwrap();
    let saved = Archive::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved.generation(), 150);
    let mut resumed = Evolver::resume(saved, &cat).unwrap();
    resumed.run_to_end().unwrap();
    assert_eq!(resumed.archive().to_json(), full.to_json());
}

#[test]
fn resume_rejects_other_catalog() {
    let cat = RuleCatalog::standard();
    let archive = run(small(30, 1), &cat).unwrap();
    let other = RuleCatalog::from_specs(1, vec![(RuleKind::DiscardOldest, Gate::Always)]);
    assert!(matches!(Evolver::resume(archive, &other), Err(EvolveError::Config(_))));
}

#[test]
fn parallel_mode_keeps_invariants() {
    let cat = RuleCatalog::standard();
    let config = EvolutionConfig { threads: 2, batch_size: 16, ..small(300, 9) };
    let mut ev = Evolver::new(config, &cat).unwrap();
    ev.run_to_end().unwrap();
    let (archive, monitor) = ev.into_parts();
    assert!(monitor.violations.is_empty());
    archive.check_invariants().unwrap();
    assert_eq!(archive.generation(), 300);
    assert!(archive.coverage() > 10);
}

#[test]
fn invalid_configs_are_rejected() {
    let cat = RuleCatalog::standard();
    for bad in [
        EvolutionConfig { random_phase: 20, ..small(10, 0) },
        EvolutionConfig { mutation_rate: 1.5, ..small(10, 0) },
        EvolutionConfig { crossover_probability: -0.1, ..small(10, 0) },
        EvolutionConfig { games_per_eval: 0, ..small(10, 0) },
        EvolutionConfig { threads: 0, ..small(10, 0) },
        EvolutionConfig { game: GameConfig { players: 7, hand_size: 4 }, ..small(10, 0) },
    ] {
        assert!(matches!(Evolver::new(bad, &cat), Err(EvolveError::Config(_))));
    }
}

#[test]
fn archive_files_round_trip() {
    let cat = RuleCatalog::standard();
    let archive = run(small(150, 2), &cat).unwrap();
    let back = Archive::from_json(&archive.to_json()).unwrap();
    assert_eq!(back, archive);
    let wrong = archive.to_json().replace("hanabi-qd/archive", "hanabi-qd/other");
    assert!(Archive::from_json(&wrong).is_err());
    let future = archive.to_json().replacen("\"version\":1", "\"version\":9", 1);
    assert!(Archive::from_json(&future).is_err());

    let csv = archive.to_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema=hanabi-qd/archive-flat"));
    assert_eq!(lines.next().unwrap(), "i,j,ipp,communicativeness,fitness,chromosome");
    assert_eq!(lines.count(), archive.coverage());
}

#[test]
fn heatmap_grid() {
    let cat = RuleCatalog::standard();
    let config = small(10, 0);
    let empty = Archive::new(config.clone(), cat.hash());
    let grid = empty.heatmap_csv();
    let rows: Vec<&str> = grid.lines().skip(2).collect();
    assert_eq!(rows.len(), 20);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("{i}{}", ",".repeat(20)));
    }

    let mut one = Archive::new(config, cat.hash());
    let d = BehaviorDescriptor::new(0.725, 0.525);
    one.insert_entry(ArchiveEntry {
        chromosome: decent(&cat),
        fitness: 7.5,
        descriptor: d,
        stats: Default::default(),
        eval_seeds: vec![],
        games_played: 0,
    })
    .unwrap();
    let grid = one.heatmap_csv();
    let filled: Vec<(usize, usize)> = grid
        .lines()
        .skip(2)
        .enumerate()
        .flat_map(|(i, row)| {
            row.split(',').skip(1).enumerate().filter(|(_, v)| !v.is_empty()).map(move |(j, _)| (i, j))
        })
        .collect();
    assert_eq!(filled, vec![(14, 10)]);
    assert_eq!(one.get(NicheIndex::new(14, 10)).unwrap().fitness, 7.5);
}

#[test]
fn reevaluation_reports_without_touching_archive() {
    let cat = RuleCatalog::standard();
    let archive = run(small(150, 6), &cat).unwrap();
    let before = archive.to_json();
    let report = reevaluate(&archive, &cat, 30, 77).unwrap();
    assert_eq!(archive.to_json(), before);
    assert_eq!(report.entries.len(), archive.coverage());
    for e in &report.entries {
        assert_eq!(e.games, 30);
        assert_eq!(e.sem, e.sd / 30f64.sqrt());
    }
    assert_eq!(reevaluate(&archive, &cat, 30, 77).unwrap(), report);

    let single = reevaluate(&archive, &cat, 1, 5).unwrap();
    for (e, (n, elite)) in single.entries.iter().zip(archive.occupied()) {
        let seeds = seed_list(5, Stream::Reevaluation, archive.cell_index(n) as u64, 1);
        let r = fitness(&cat, &elite.chromosome, &seeds, archive.config().game).unwrap();
        assert_eq!(e.mean, r.mean());
        assert_eq!(e.sd, 0.0);
    }

    let empty = Archive::new(small(1, 0), cat.hash());
    assert!(matches!(reevaluate(&empty, &cat, 10, 0), Err(EvolveError::EmptyArchive)));
}
