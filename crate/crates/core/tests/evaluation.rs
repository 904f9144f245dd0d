mod common;

use common::{decent, hinter, small_archive, small_config};
use hanabi_qd_core::elites::{fitness, Archive};
use hanabi_qd_core::engine::GameConfig;
use hanabi_qd_core::evaluation::{
    corresponding_pairs, cross_play_chromosomes, pair_seeds, EvaluationError, MatchupMatrix, MatchupSummary, Seating,
};
use hanabi_qd_core::metrics::NicheIndex;
use hanabi_qd_core::rules::RuleCatalog;
use hanabi_qd_core::seed::{seed_list, Stream};

#[test]
fn self_cross_play_equals_fitness() {
    let cat = RuleCatalog::standard();
    let seeds = seed_list(3, Stream::Evaluation, 0, 40);
    let x = decent(&cat);
    let f = fitness(&cat, &x, &seeds, GameConfig::two_player()).unwrap();
    let c = cross_play_chromosomes(&cat, &x, &x, GameConfig::two_player(), &seeds, Seating::Normal).unwrap();
    assert_eq!(c, f.summary);
}

#[test]
fn mirrored_seating_gives_identical_games() {
    let cat = RuleCatalog::standard();
    let seeds = seed_list(4, Stream::Matchup, 0, 60);
    let (a, b) = (decent(&cat), hinter(&cat));
    let g = GameConfig::two_player();
    let ab = cross_play_chromosomes(&cat, &a, &b, g, &seeds, Seating::Normal).unwrap();
    let ba = cross_play_chromosomes(&cat, &a, &b, g, &seeds, Seating::Mirrored).unwrap();
    assert_eq!(ab, ba);
    // Swapping the arguments and mirroring is the same thing.
    let swapped = cross_play_chromosomes(&cat, &b, &a, g, &seeds, Seating::Mirrored).unwrap();
    let normal = cross_play_chromosomes(&cat, &b, &a, g, &seeds, Seating::Normal).unwrap();
    assert_eq!(swapped, normal);
}

#[test]
fn cross_play_needs_two_seats() {
    let cat = RuleCatalog::standard();
    let g = GameConfig::standard(3).unwrap();
    assert!(cross_play_chromosomes(&cat, &decent(&cat), &hinter(&cat), g, &[1], Seating::Normal).is_err());
}

#[test]
fn pair_seeds_are_symmetric_and_distinct() {
    let (a, b, c) = (NicheIndex::new(1, 2), NicheIndex::new(7, 3), NicheIndex::new(0, 19));
    assert_eq!(pair_seeds(1, 20, a, b, 5), pair_seeds(1, 20, b, a, 5));
    assert_ne!(pair_seeds(1, 20, a, b, 5), pair_seeds(1, 20, a, c, 5));
    assert_ne!(pair_seeds(1, 20, a, a, 5), pair_seeds(2, 20, a, a, 5));
}

fn matrix(cat: &RuleCatalog) -> (Archive, MatchupMatrix) {
    let archive = small_archive(cat, 120, 8);
    let m = MatchupMatrix::compute(&archive, cat, 6, 11, "test").unwrap();
    (archive, m)
}

#[test]
fn matrix_covers_every_unordered_pair() {
    let cat = RuleCatalog::standard();
    let (archive, m) = matrix(&cat);
    let k = archive.coverage();
    assert!(k > 3);
    assert_eq!(m.len(), k);
    assert_eq!(m.pairs().len(), k * (k + 1) / 2);
    for &a in m.niches() {
        for &b in m.niches() {
            assert_eq!(m.score(a, b), m.score(b, a));
        }
    }
    // Self-pairs are self-play on the pair's own seeds.
    for (n, e) in archive.occupied() {
        let seeds = pair_seeds(11, archive.bins(), n, n, 6);
        let f = fitness(&cat, &e.chromosome, &seeds, archive.config().game).unwrap();
        assert_eq!(m.score(n, n), f.mean());
    }
    // An arbitrary off-diagonal pair, recomputed directly.
    let (a, b) = (m.niches()[0], m.niches()[k - 1]);
    let seeds = pair_seeds(11, archive.bins(), a, b, 6);
    let direct = cross_play_chromosomes(
        &cat,
        &archive.get(a).unwrap().chromosome,
        &archive.get(b).unwrap().chromosome,
        archive.config().game,
        &seeds,
        Seating::Normal,
    )
    .unwrap();
    assert_eq!(m.score(a, b), direct.mean);
    assert!(m.max_sd() <= 12.5);
}

#[test]
fn matrix_is_independent_of_thread_count() {
    let cat = RuleCatalog::standard();
    let archive = small_archive(&cat, 90, 5);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| MatchupMatrix::compute(&archive, &cat, 4, 2, "p").unwrap());
    let b = four.install(|| MatchupMatrix::compute(&archive, &cat, 4, 2, "p").unwrap());
    assert_eq!(a, b);
}

#[test]
fn matrix_csv_round_trip() {
    let cat = RuleCatalog::standard();
    let (_, m) = matrix(&cat);
    let csv = m.to_csv();
    assert!(csv.starts_with("# schema=hanabi-qd/matchup version=1 population=test games_per_pair=6 seed=11\n"));
    assert_eq!(csv.lines().nth(1).unwrap(), "iA,jA,iB,jB,mean,sd,n");
    let back = MatchupMatrix::from_csv(&csv).unwrap();
    assert_eq!(back, m);

    // Dropping a row leaves the matrix incomplete.
    let mut lines: Vec<&str> = csv.lines().collect();
    lines.remove(3);
    assert!(MatchupMatrix::from_csv(&(lines.join("\n") + "\n")).is_err());
    // Duplicating one is rejected too.
    let dup = format!("{csv}{}\n", csv.lines().nth(2).unwrap());
    assert!(MatchupMatrix::from_csv(&dup).is_err());

    let summary = m.summary();
    assert_eq!(summary.pairs, m.pairs().len());
    let json = serde_json::to_string(&summary).unwrap();
    assert_eq!(MatchupSummary::from_json(&json).unwrap(), summary);
}

#[test]
fn from_pairs_accepts_any_order() {
    let cat = RuleCatalog::standard();
    let (_, m) = matrix(&cat);
    let mut rows: Vec<_> = m.pairs().to_vec();
    rows.reverse();
    for r in rows.iter_mut().step_by(2) {
        std::mem::swap(&mut r.a, &mut r.b);
    }
    let back = MatchupMatrix::from_pairs("test".into(), 6, 11, rows).unwrap();
    for &a in m.niches() {
        for &b in m.niches() {
            assert_eq!(back.score(a, b), m.score(a, b));
        }
    }
}

#[test]
fn corresponding_pairs_of_an_archive_with_itself_are_self_play() {
    let cat = RuleCatalog::standard();
    let archive = small_archive(&cat, 90, 3);
    let report = corresponding_pairs(&archive, &archive, &cat, 10, 4).unwrap();
    assert_eq!(report.pairs.len(), archive.coverage());
    for p in &report.pairs {
        let e = archive.get(p.niche).unwrap();
        assert_eq!(p.hamming, 0);
        let seeds = seed_list(4, Stream::CrossPlay, archive.cell_index(p.niche) as u64, 10);
        let f = fitness(&cat, &e.chromosome, &seeds, archive.config().game).unwrap();
        assert_eq!(p.mean, f.mean());
        assert_eq!(p.fitness_a, p.fitness_b);
    }
    assert_eq!(report.mean_hamming(), 0.0);
    assert_eq!(report.to_csv().lines().count(), archive.coverage() + 2);
}

#[test]
fn corresponding_pairs_need_overlap_and_matching_grids() {
    let cat = RuleCatalog::standard();
    let a = small_archive(&cat, 60, 1);
    let empty = Archive::new(small_config(10, 0), cat.hash());
    let report = corresponding_pairs(&a, &empty, &cat, 5, 0).unwrap();
    assert!(report.pairs.is_empty());
    let coarse = Archive::new(hanabi_qd_core::elites::EvolutionConfig { bins: 10, ..small_config(10, 0) }, cat.hash());
    assert!(matches!(corresponding_pairs(&a, &coarse, &cat, 5, 0), Err(EvaluationError::GridMismatch(20, 10))));
}
